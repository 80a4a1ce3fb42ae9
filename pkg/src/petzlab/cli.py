"""Command-line front end.

    petzlab scan    --config FILE [--out FILE]
    petzlab verify  --config FILE [--out FILE]
    petzlab bathsim --config FILE [--out FILE] [--seed N]

Exit codes: 0 success, 1 a verification failed, 2 configuration error,
3 model construction or runtime error.
"""

import argparse
import io
import sys

import numpy as np

from petzlab import bathsim, bounds, channels, lindblad, numcore
from petzlab.config import load_config
from petzlab.ensemble import SplitMix64, random_hermitian
from petzlab.errors import ConfigError, DimensionError, PetzlabError
from petzlab.numcore import DensityMatrix, HermitianOperator

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

VERIFY_TOL = {
    "cptp": 1e-8,
    "fixed_point": 1e-8,
    "qdb": 1e-8,
    "qdb_alt": 1e-8,
    "ttsfp": 1e-8,
    "self_recovery": 1e-9,
    "spohn_positivity": 1e-9,
}


def fmt(x):
    """15 significant digits; negative zero printed as ``0``."""
    return format(float(x) + 0.0, ".15g")


def _write_csv(header, rows, out):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(row) + "\n")
    text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------- models

def _davies_from_config(cfg, check_kms=None):
    """Build ``(model, generator, rho0-or-None)`` from Davies keys."""
    h = cfg.matrix("H_S_energy")
    d = h.shape[0]
    try:
        h_op = HermitianOperator(h)
    except PetzlabError as exc:
        raise ConfigError("H_S_energy", str(exc)) from None
    temp = cfg.real("beta_inv_energy", 1.0, low=0.0, open_low=True)
    gamma0 = cfg.real("gamma0_rate", 1.0, low=0.0, open_low=True)
    rate_model = cfg.string("rate_model", "kms", choices=("kms", "symmetric"))
    ops = []
    for key in cfg.keys_with_prefix("coupling_"):
        a = cfg.matrix(key, dim=d)
        if np.max(np.abs(a - a.conj().T)) > numcore.HERMITIAN_REJECT:
            raise ConfigError(key, "coupling operator must be Hermitian")
        ops.append(a)
    rate = lindblad.symmetric_rate(gamma0) if rate_model == "symmetric" else None
    model = lindblad.DaviesModel(h_op, 1.0 / temp, ops, gamma0=gamma0, rate_function=rate)
    if check_kms is None:
        check_kms = rate_model == "kms"
    lb = lindblad.davies_generator(model, check_kms=check_kms)
    rho0 = None
    if "rho0" in cfg:
        try:
            rho0 = DensityMatrix(cfg.matrix("rho0", dim=d))
        except PetzlabError as exc:
            raise ConfigError("rho0", str(exc)) from None
    return model, lb, rho0


def _qubit_from_config(cfg):
    q = cfg.real("q", low=0.0, high=1.0, open_low=True, open_high=True)
    p0 = cfg.real("p0", low=0.0, high=1.0, open_low=True, open_high=True)
    rate = cfg.real("A_rate", 1.0, low=0.0, open_low=True)
    model = lindblad.qubit_davies_model(q, rate)
    lb = lindblad.davies_generator(model)
    rho0 = DensityMatrix(np.diag([p0, 1.0 - p0]).astype(np.complex128))
    return model, lb, rho0, rate


# ---------------------------------------------------------------- commands

def cmd_scan(cfg, out):
    kind = cfg.string("model", "davies", choices=("qubit", "davies"))
    if kind == "qubit":
        _, lb, rho0, rate = _qubit_from_config(cfg)
    else:
        model, lb, rho0 = _davies_from_config(cfg)
        if rho0 is None:
            raise ConfigError("rho0", "missing required entry")
        rate = model.gamma0
    k_list = cfg.reals("k", [2.0], low=0.0)
    n = cfg.integer("n_times", 60, low=1)
    t_min = cfg.real("t_min_time", 1e-3, low=0.0, open_low=True)
    t_max = cfg.real("t_max_time", 50.0, low=t_min)
    grid = bounds.default_grid(rate, n, t_min, t_max)
    if cfg.boolean("include_zero", False):
        grid = np.concatenate(([0.0], grid))
    result = bounds.doubled_time_scan(lb, rho0, grid, k_list)
    header = ["t", "lhs"] + [f"rhs_k{k:g}" for k in result.rhs] + ["d_to_fixed"]
    rows = []
    for i, t in enumerate(result.t_grid):
        row = [fmt(t), fmt(result.lhs[i])]
        row += [fmt(values[i]) for values in result.rhs.values()]
        row.append(fmt(result.d_to_fixed[i]))
        rows.append(row)
    _write_csv(header, rows, out)
    return EXIT_OK


def _self_recovery_residual(lb, omega, t):
    m = lindblad.evolve(lb, t, include_unitary=False)
    p = channels.petz_recovery(m, omega)
    return float(np.max(np.abs(p.matrix - m.matrix)))


def _spohn_residual(lb, rho0, tau, times):
    """``max(0, -min sigma)`` along the dissipative trajectory of ``rho0``."""
    prop = lindblad.propagator(lb, include_unitary=False)
    worst = 0.0
    for t in times:
        rate = bounds.spohn_rate(lb, channels.apply(prop(t), rho0), tau=tau)
        if not rate.divergent:
            worst = max(worst, -rate.rate)
    return worst


def verify_checks(cfg):
    """Run the verification suite; list of ``(name, residual, tol)``."""
    model, lb, rho0 = _davies_from_config(cfg, check_kms=False)
    t = cfg.real("t_time", 1.0, low=0.0, open_low=True)
    omega = numcore.gibbs(model.H_S, model.beta)
    d = lb.dim
    if rho0 is None:
        rho0 = DensityMatrix(np.eye(d, dtype=np.complex128) / d)
    cptp = channels.is_cptp(lindblad.evolve(lb, t))
    results = [
        ("cptp", max(cptp.cp_residual, cptp.tp_residual)),
        ("fixed_point", numcore.trace_norm(numcore.hermitize(lb(omega.data)))),
        ("qdb", lindblad.check_qdb(lb, omega)),
        ("qdb_alt", lindblad.check_qdb_alt(lb, omega)),
        ("ttsfp", lindblad.check_ttsfp(lb, omega)),
        ("self_recovery", _self_recovery_residual(lb, omega, t)),
        ("spohn_positivity", _spohn_residual(lb, rho0, omega, np.linspace(0.0, 5.0 * t, 11))),
    ]
    return [(name, res, VERIFY_TOL[name]) for name, res in results]


def cmd_verify(cfg, out):
    checks = verify_checks(cfg)
    lines = []
    ok = True
    for name, res, tol in checks:
        passed = res <= tol
        ok &= passed
        lines.append(f"CHECK {name} residual={res:.3e} tol={tol:g} {'PASS' if passed else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bathsim(cfg, out, seed):
    h_s = cfg.matrix("H_S_energy")
    try:
        h_s = HermitianOperator(h_s)
    except PetzlabError as exc:
        raise ConfigError("H_S_energy", str(exc)) from None
    ds = h_s.dim
    levels = cfg.integer("bath_levels", low=1)
    omega_b = cfg.real("bath_omega_energy", 1.0, low=0.0, open_low=True)
    temp = cfg.real("beta_inv_energy", 1.0, low=0.0, open_low=True)
    lambdas = cfg.reals("lambda_energy", low=0.0)
    alphas = cfg.reals("alpha", [0.5, 1.0], low=0.0, open_low=True)
    t_tilde = cfg.real("t_tilde_time", 1.0, low=0.0)
    kind = cfg.string("interaction", "ladder", choices=("ladder", "random"))
    if ds < 2 and kind == "ladder":
        raise ConfigError("H_S_energy", "ladder coupling needs at least two system levels")
    if ds * levels > bathsim.MAX_JOINT_DIM:
        raise DimensionError(
            f"joint dimension {ds * levels} exceeds the cap of {bathsim.MAX_JOINT_DIM}")
    base = bathsim.ladder_bath(levels, omega_b, 1.0 / temp, 0.0, system_dim=ds)
    if kind == "random":
        inter = random_hermitian(SplitMix64(seed), ds * levels).data
        inter = inter / numcore.operator_norm(inter)
        base = bathsim.BathModel(base.H_B, base.beta, HermitianOperator(inter), 0.0)
    rows = []
    ok = True
    for lam in lambdas:
        bath = base.with_lambda(lam)
        for alpha in alphas:
            rep = bathsim.correlation_bound_check(h_s, bath, alpha, t_tilde)
            ok &= rep.passed
            rows.append([fmt(lam), fmt(alpha), fmt(rep.lhs), fmt(rep.rhs),
                         "1" if rep.passed else "0"])
    _write_csv(["lambda", "alpha", "lhs", "rhs", "pass"], rows, out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="petzlab",
                                     description="Entropy-production scans and checks for Davies semigroups.")
    parser.add_argument("command", choices=("scan", "verify", "bathsim"))
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--seed", type=int, default=0, help="seed for random ensembles")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        if args.command == "scan":
            return cmd_scan(cfg, args.out)
        if args.command == "verify":
            return cmd_verify(cfg, args.out)
        return cmd_bathsim(cfg, args.out, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PetzlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
