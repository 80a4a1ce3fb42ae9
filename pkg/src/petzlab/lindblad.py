"""Lindblad generators, Davies thermalization and detailed-balance checks.

A :class:`Lindbladian` holds the dissipative generator ``L`` as a
superoperator matrix together with an effective Hamiltonian; the full
generator is ``L + i theta`` with ``theta(X) = -[H_eff, X]``, so the
semigroup is ``exp(t (L + i theta))``.
"""

from dataclasses import dataclass, field
import math
from typing import Callable, Sequence
import warnings

import numpy as np

from petzlab import channels, numcore
from petzlab.channels import Superoperator, sandwich
from petzlab.errors import ConstructionError, DomainError, PreconditionError
from petzlab.numcore import DensityMatrix, HermitianOperator, as_array

GROUPING_TOL = 1e-9
MODE_TOL = 1e-9
# spacings below this (relative to the energy scale) count as exact equality
EXACT_TOL = 1e-12


def dissipator(jump, rate=1.0):
    """Superoperator of ``rate * (J X J^H - {J^H J, X}/2)``."""
    j = np.asarray(jump, dtype=np.complex128)
    d = j.shape[0]
    eye = np.eye(d)
    jdj = j.conj().T @ j
    return rate * (sandwich(j, j.conj().T) - 0.5 * sandwich(jdj, eye) - 0.5 * sandwich(eye, jdj))


def hamiltonian_superop(h):
    """Superoperator of ``theta(X) = -[H, X]``."""
    h = as_array(h)
    eye = np.eye(h.shape[0])
    return -(sandwich(h, eye) - sandwich(eye, h))


def _column_norms_max(m):
    if m.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(m, axis=0)))


@dataclass(frozen=True, eq=False)
class Lindbladian:
    """Dissipative generator plus effective Hamiltonian and optional fixed point.

    Construction checks Hermiticity preservation, trace annihilation and,
    when ``declared_fixed_point`` is given, stationarity of that state and
    its commutation with ``unitary_part``.
    """

    dissipative: np.ndarray
    unitary_part: HermitianOperator | None = None
    declared_fixed_point: DensityMatrix | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.dissipative, dtype=np.complex128)
        d = math.isqrt(m.shape[0])
        if m.ndim != 2 or m.shape != (d * d, d * d):
            raise ConstructionError(f"generator must be d^2 x d^2, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "dissipative", m)
        h = self.unitary_part
        h = HermitianOperator(np.zeros((d, d)) if h is None else as_array(h))
        if h.dim != d:
            raise ConstructionError(f"unitary part has dimension {h.dim}, generator {d}")
        object.__setattr__(self, "unitary_part", h)
        if self.validate:
            problems = self.invariant_residuals()
            scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
            limits = {"hermiticity": 1e-10, "trace": 1e-10,
                      "fixed_point": 1e-9, "heff_commutator": 1e-10}
            for key, value in problems.items():
                if value > limits[key] * scale:
                    raise ConstructionError(f"generator violates {key} invariant (residual {value:.3e})")

    @property
    def dim(self):
        return math.isqrt(self.dissipative.shape[0])

    @property
    def theta(self):
        """Matrix of the unitary part ``theta(X) = -[H_eff, X]``."""
        return hamiltonian_superop(self.unitary_part)

    def generator(self, include_unitary=True):
        if include_unitary:
            return self.dissipative + 1j * self.theta
        return self.dissipative

    def __call__(self, x):
        d = self.dim
        return channels.unvec(self.dissipative @ channels.vec(x), d)

    def invariant_residuals(self):
        d = self.dim
        m = self.dissipative
        herm = 0.0
        for i in range(d):
            for j in range(d):
                e = np.zeros((d, d), dtype=np.complex128)
                e[i, j] = 1.0
                out = channels.unvec(m @ channels.vec(e), d)
                out_dag = channels.unvec(m @ channels.vec(e.T), d)
                herm = max(herm, float(np.max(np.abs(out_dag - out.conj().T))))
        trace_row = channels.vec(np.eye(d)).conj() @ m
        res = {"hermiticity": herm, "trace": float(np.max(np.abs(trace_row)))}
        if self.declared_fixed_point is not None:
            om = self.declared_fixed_point.data
            res["fixed_point"] = numcore.trace_norm(numcore.hermitize(self(om)))
            res["heff_commutator"] = numcore.operator_norm(
                numcore.commutator(self.unitary_part.data, om))
        return res


def kms_rate(gamma0, beta):
    """Default KMS rate: ``gamma0`` for ``w >= 0``, ``gamma0 exp(beta w)`` below."""
    def rate(omega):
        return gamma0 if omega >= 0 else gamma0 * math.exp(beta * omega)
    return rate


def symmetric_rate(gamma0):
    """Constant rate ``gamma0``; violates KMS for any nonzero Bohr frequency."""
    def rate(omega):
        return gamma0
    return rate


@dataclass(frozen=True, eq=False)
class DaviesModel:
    """System Hamiltonian, temperature, coupling operators and jump rates.

    ``rate_function`` maps a Bohr frequency ``w`` (energy lost by the system
    in the jump) to a non-negative rate; it defaults to :func:`kms_rate`.
    """

    H_S: HermitianOperator
    beta: float
    coupling_ops: Sequence[np.ndarray] = ()
    gamma0: float = 1.0
    rate_function: Callable[[float], float] | None = None

    def __post_init__(self):
        if not isinstance(self.H_S, HermitianOperator):
            object.__setattr__(self, "H_S", HermitianOperator(self.H_S))
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= 0.0:
            raise DomainError(f"beta must be finite and positive, got {beta!r}")
        object.__setattr__(self, "beta", beta)
        ops = tuple(HermitianOperator(a).data for a in self.coupling_ops)
        for a in ops:
            if a.shape[0] != self.H_S.dim:
                raise ConstructionError(f"coupling operator of dimension {a.shape[0]} "
                                        f"does not match H_S dimension {self.H_S.dim}")
        object.__setattr__(self, "coupling_ops", ops)
        if self.rate_function is None:
            object.__setattr__(self, "rate_function", kms_rate(self.gamma0, beta))

    def kms_residual(self):
        """Largest relative violation of ``g(-w) = exp(-beta w) g(w)``."""
        worst = 0.0
        for omega in _bohr_frequencies(_energy_levels(self.H_S)[0]):
            if omega <= 0:
                continue
            up = self.rate_function(-omega)
            down = math.exp(-self.beta * omega) * self.rate_function(omega)
            denom = max(abs(up), abs(down))
            if denom > 0:
                worst = max(worst, abs(up - down) / denom)
        return worst


def _cluster(values, tol, scale, what):
    """Group sorted-able values within ``tol``; reject ambiguous near-collisions."""
    order = np.argsort(values, kind="stable")
    groups = []
    for idx in order:
        v = values[idx]
        if groups and abs(v - groups[-1][0]) <= tol:
            if abs(v - groups[-1][0]) > EXACT_TOL * scale:
                raise ConstructionError(
                    f"{what} {groups[-1][0]!r} and {v!r} collide within {tol:g} "
                    "but are not equal")
            groups[-1][1].append(idx)
        else:
            groups.append([v, [idx]])
    return groups


def _energy_levels(h):
    """Distinct energies of ``h`` and the projector onto each eigenspace."""
    spec = numcore.eigh(h)
    w = spec.eigenvalues
    scale = max(1.0, float(np.max(np.abs(w))))
    levels, projectors = [], []
    for value, idx in _cluster(w, GROUPING_TOL, scale, "energies"):
        v = spec.eigenvectors[:, idx]
        levels.append(float(np.mean(w[idx])))
        projectors.append(v @ v.conj().T)
    return np.array(levels), projectors


def _bohr_frequencies(levels):
    diffs = (levels[:, None] - levels[None, :]).ravel()
    scale = max(1.0, float(np.max(np.abs(levels)))) if levels.size else 1.0
    return [float(np.mean(diffs[idx])) for _, idx in _cluster(diffs, GROUPING_TOL, scale,
                                                              "Bohr frequencies")]


def eigenoperators(h, a):
    """Decompose ``a`` into ``A(w) = sum_{E'-E=w} P_E a P_E'`` keyed by ``w``.

    ``A(w)`` lowers the energy by ``w``; ``sum_w A(w) == a``.
    """
    levels, projectors = _energy_levels(h)
    n = len(levels)
    diffs = (levels[None, :] - levels[:, None])  # [E index, E' index] -> E' - E
    scale = max(1.0, float(np.max(np.abs(levels))))
    result = []
    for _, idx in _cluster(diffs.ravel(), GROUPING_TOL, scale, "Bohr frequencies"):
        op = np.zeros_like(as_array(a))
        omegas = []
        for flat in idx:
            e, ep = divmod(int(flat), n)
            op = op + projectors[e] @ a @ projectors[ep]
            omegas.append(diffs[e, ep])
        result.append((float(np.mean(omegas)), op))
    return result


def davies_generator(model, check_kms=True):
    """Davies generator of ``model`` in GKLS form with ``H_eff = H_S``.

    The declared fixed point is the Gibbs state of ``H_S``; it is omitted
    when ``check_kms`` is False, since arbitrary rates need not fix it.

    Raises:
        ConstructionError: on ambiguous energy or Bohr-frequency collisions,
            or rates that violate the KMS condition when ``check_kms``.
    """
    h = model.H_S
    d = h.dim
    if check_kms:
        res = model.kms_residual()
        if res > 1e-10:
            raise ConstructionError(f"rate function violates the KMS condition (relative residual {res:.3e})")
    gen = np.zeros((d * d, d * d), dtype=np.complex128)
    for a in model.coupling_ops:
        for omega, op in eigenoperators(h, a):
            rate = float(model.rate_function(omega))
            if rate < 0:
                raise ConstructionError(f"negative rate {rate!r} at Bohr frequency {omega!r}")
            if rate == 0.0 or not np.any(op):
                continue
            gen += dissipator(op, rate)
    fixed = numcore.gibbs(h, model.beta) if check_kms else None
    return Lindbladian(gen, unitary_part=h, declared_fixed_point=fixed)


def qubit_davies_model(q, A, rate_function=None):
    """Two-level Davies model whose populations follow :func:`qubit_davies`.

    The thermal state is ``diag(q, 1 - q)``.  Uses ``beta = 1``,
    ``H_S = diag(log((1-q)/q), 0)`` and a Pauli-X coupling with rate scale
    ``gamma0 = A * max(q, 1 - q)``, which makes the population relaxation
    rate exactly ``A``.
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if A <= 0:
        raise DomainError(f"A must be positive, got {A!r}")
    omega0 = math.log((1.0 - q) / q)
    gamma0 = A * max(q, 1.0 - q)
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    return DaviesModel(HermitianOperator(np.diag([omega0, 0.0])), 1.0, [sx],
                       gamma0=gamma0, rate_function=rate_function)


def qubit_davies(q, A, t):
    """Population transfer matrix of the qubit Davies map at time ``t``.

    Columns act on ``(p, 1 - p)``; ``a_t = (1 - q)(1 - exp(-A t))``.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q!r}")
    if A <= 0 or t < 0:
        raise DomainError(f"need A > 0 and t >= 0, got A={A!r}, t={t!r}")
    a = (1.0 - q) * (-math.expm1(-A * t))
    r = a * q / (1.0 - q)
    return np.array([[1.0 - a, r], [a, 1.0 - r]])


def superop_expm(g, cond_limit=1e8):
    """Exponential of a (generally non-normal) superoperator matrix.

    Uses the eigendecomposition when the eigenvector matrix has condition
    number below ``cond_limit``, else Taylor scaling and squaring.
    """
    g = np.asarray(g, dtype=np.complex128)
    n = g.shape[0]
    if not np.all(np.isfinite(g)):
        raise DomainError("generator has non-finite entries")
    if not np.any(g):
        return np.eye(n, dtype=np.complex128)
    w, v = np.linalg.eig(g)
    cond = np.linalg.cond(v)
    if math.isfinite(cond) and cond < cond_limit:
        out = (v * np.exp(w)) @ np.linalg.inv(v)
    else:
        out = taylor_expm(g)
    if not np.all(np.isfinite(out)):
        raise DomainError("exponential overflowed")
    return out


def taylor_expm(g, tol=1e-12):
    """Scaling and squaring with a truncated Taylor series."""
    g = np.asarray(g, dtype=np.complex128)
    n = g.shape[0]
    norm = float(np.max(np.sum(np.abs(g), axis=0)))
    s = max(0, int(math.ceil(math.log2(norm / 0.5)))) if norm > 0.5 else 0
    a = g / (2.0 ** s)
    out = np.eye(n, dtype=np.complex128)
    term = np.eye(n, dtype=np.complex128)
    for k in range(1, 60):
        term = term @ a / k
        out = out + term
        if float(np.max(np.abs(term))) < tol * 1e-4:
            break
    for _ in range(s):
        out = out @ out
    return out


class Propagator:
    """Reusable ``t -> exp(t G)`` for a fixed generator matrix ``G``.

    The eigendecomposition is computed once; generators whose eigenvector
    matrix is too ill-conditioned fall back to :func:`taylor_expm` per call.
    """

    def __init__(self, g, cond_limit=1e8):
        self.g = np.asarray(g, dtype=np.complex128)
        self.dim = math.isqrt(self.g.shape[0])
        self._eig = None
        if not np.all(np.isfinite(self.g)):
            raise DomainError("generator has non-finite entries")
        if np.any(self.g):
            w, v = np.linalg.eig(self.g)
            cond = np.linalg.cond(v)
            if math.isfinite(cond) and cond < cond_limit:
                self._eig = (w, v, np.linalg.inv(v))

    def matrix(self, t):
        t = float(t)
        if not math.isfinite(t) or t < 0.0:
            raise DomainError(f"time must be finite and non-negative, got {t!r}")
        n = self.g.shape[0]
        if t == 0.0 or not np.any(self.g):
            return np.eye(n, dtype=np.complex128)
        if self._eig is not None:
            w, v, vinv = self._eig
            out = (v * np.exp(t * w)) @ vinv
        else:
            out = taylor_expm(t * self.g)
        if not np.all(np.isfinite(out)):
            raise DomainError("exponential overflowed")
        return out

    def __call__(self, t):
        return Superoperator(self.matrix(t))


def evolve(lb, t, include_unitary=True):
    """Semigroup map ``exp(t (L + i theta))`` (or ``exp(t L)``) as a superoperator."""
    t = float(t)
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be finite and non-negative, got {t!r}")
    if t == 0.0:
        return Superoperator.identity(lb.dim)
    return Superoperator(superop_expm(t * lb.generator(include_unitary)))


def propagator(lb, include_unitary=True):
    """Cached :class:`Propagator` for the generator of ``lb``."""
    return Propagator(lb.generator(include_unitary))


def _full_rank_spec(omega, name="Omega"):
    spec = numcore.eigh(as_array(omega))
    if spec.eigenvalues[0] <= numcore.RANK_TOL:
        raise PreconditionError(f"{name} must be full rank; smallest eigenvalue {spec.eigenvalues[0]:.3e}")
    return spec


def _spec_power(spec, power):
    v = spec.eigenvectors
    return (v * np.power(spec.eigenvalues.astype(np.complex128), power)) @ v.conj().T


def _generator_matrix(lb_or_matrix):
    if isinstance(lb_or_matrix, Lindbladian):
        return lb_or_matrix.dissipative
    return np.asarray(lb_or_matrix, dtype=np.complex128)


def qdb_residual_matrix(m, omega):
    """``max_A ||M(A) - O^1/2 M^H(O^-1/2 A O^-1/2) O^1/2||_F`` over matrix units."""
    spec = _full_rank_spec(omega)
    half = _spec_power(spec, 0.5)
    mhalf = _spec_power(spec, -0.5)
    rhs = sandwich(half, half) @ m.conj().T @ sandwich(mhalf, mhalf)
    return _column_norms_max(m - rhs)


def check_qdb(lb, omega):
    """Residual of quantum detailed balance for the symmetric KMS inner product.

    Measures ``L = O^1/2 L^H(O^-1/2 . O^-1/2) O^1/2`` column by column on
    the matrix-unit basis; zero iff ``L^H`` is self-adjoint for
    ``<A, B>_O = Tr[O^1/2 A^H O^1/2 B]``.
    """
    return qdb_residual_matrix(_generator_matrix(lb), omega)


def check_qdb_alt(lb, omega):
    """Residual of detailed balance for ``<A, B>'_O = Tr[O A^H B]``.

    Measures ``L = O L^H(O^-1 .)`` on the matrix-unit basis.
    """
    m = _generator_matrix(lb)
    spec = _full_rank_spec(omega)
    om = _spec_power(spec, 1.0)
    om_inv = _spec_power(spec, -1.0)
    eye = np.eye(om.shape[0])
    rhs = sandwich(om, eye) @ m.conj().T @ sandwich(om_inv, eye)
    return _column_norms_max(m - rhs)


def check_ttsfp(lb, omega, t_samples=(0.5, 1.0, math.pi)):
    """Residual of time-translation symmetry with respect to ``omega``.

    Max over ``t_samples`` and matrix units of
    ``||L(A) - O^it L(O^-it A O^it) O^-it||_F``.
    """
    m = _generator_matrix(lb)
    spec = _full_rank_spec(omega)
    worst = 0.0
    for t in t_samples:
        plus = _spec_power(spec, 1j * t)
        minus = _spec_power(spec, -1j * t)
        rotated = sandwich(plus, minus) @ m @ sandwich(minus, plus)
        worst = max(worst, _column_norms_max(m - rotated))
    return worst


@dataclass(frozen=True, eq=False)
class ModeDecomposition:
    """Components ``A_w`` of an operator keyed by log-population ratio ``w``."""

    modes: list

    @property
    def omegas(self):
        return [w for w, _ in self.modes]

    def total(self):
        return sum(c for _, c in self.modes)


def _mode_masks(omega, mode_tol):
    spec = _full_rank_spec(omega)
    logp = np.log(spec.eigenvalues)
    ratios = logp[:, None] - logp[None, :]
    flat = ratios.ravel()
    order = np.argsort(flat, kind="stable")
    groups = []
    for idx in order:
        v = flat[idx]
        if groups and abs(v - groups[-1][0]) <= mode_tol:
            if abs(v - groups[-1][0]) > EXACT_TOL:
                warnings.warn(f"log-population ratios {groups[-1][0]!r} and {v!r} "
                              f"collide within mode_tol={mode_tol:g}; grouped together",
                              stacklevel=3)
            groups[-1][1].append(idx)
        else:
            groups.append([v, [idx]])
    n = len(logp)
    masks = []
    for _, idx in groups:
        mask = np.zeros(n * n, dtype=bool)
        mask[idx] = True
        masks.append((float(np.mean(flat[idx])), mask.reshape(n, n)))
    return spec.eigenvectors, masks


def mode_decompose(a, omega, mode_tol=MODE_TOL):
    """Split ``a`` into modes of coherence with respect to ``omega``.

    ``A_w = sum_{log(p_k/p_l) = w} |k><k| a |l><l|`` in the eigenbasis of
    ``omega``, so that ``O^-it A_w O^it = exp(-i w t) A_w``.  Only non-zero
    components are returned.
    """
    a = np.asarray(as_array(a), dtype=np.complex128)
    v, masks = _mode_masks(omega, mode_tol)
    b = v.conj().T @ a @ v
    modes = []
    for w, mask in masks:
        comp = np.where(mask, b, 0.0)
        if np.any(comp):
            modes.append((w, v @ comp @ v.conj().T))
    return ModeDecomposition(modes)


def check_mode_preservation(lb, omega, mode_tol=MODE_TOL, ttsfp_tol=1e-8):
    """``max ||L(A_w) - L(A)_w||_F`` over matrix units ``A`` and modes ``w``.

    Raises:
        PreconditionError: if the generator is not time-translation
            symmetric about ``omega`` within ``ttsfp_tol``.
    """
    m = _generator_matrix(lb)
    ttsfp = check_ttsfp(m, omega)
    if ttsfp > ttsfp_tol:
        raise PreconditionError(f"mode preservation requires TTSFP; residual is {ttsfp:.3e}")
    v, masks = _mode_masks(omega, mode_tol)
    to_eig = sandwich(v.conj().T, v)
    from_eig = sandwich(v, v.conj().T)
    worst = 0.0
    for _, mask in masks:
        proj = from_eig @ np.diag(channels.vec(mask).real) @ to_eig
        worst = max(worst, _column_norms_max(m @ proj - proj @ m))
    return worst


def verify_self_recovery(lb, omega, t, qdb_tol=1e-8):
    """Max entry difference between the Petz map of ``exp(tL)`` and the map itself.

    Only the dissipative semigroup is examined; the unitary part is ignored.

    Raises:
        PreconditionError: if detailed balance fails beyond ``qdb_tol``.
    """
    res = check_qdb(lb, omega)
    if res > qdb_tol:
        raise PreconditionError(f"self-recovery requires detailed balance; residual {res:.3e}")
    m = evolve(lb, t, include_unitary=False)
    p = channels.petz_recovery(m, omega)
    return float(np.max(np.abs(p.matrix - m.matrix)))


@dataclass(frozen=True, eq=False)
class UnitaryReversalReport:
    petz_residual: float
    composite_residual: float

    @property
    def residual(self):
        return max(self.petz_residual, self.composite_residual)


def verify_unitary_reversal(lb, omega, t, qdb_tol=1e-8):
    """Compare the Petz map of ``exp(t(i theta + L))`` with ``exp(t(-i theta + L))``.

    Also reports ``max |Petz o M_t - exp(2tL)|`` as ``composite_residual``.

    Raises:
        PreconditionError: if detailed balance, ``[H_eff, omega] = 0`` or the
            commutation of ``theta`` with ``L`` fails.
    """
    res = check_qdb(lb, omega)
    if res > qdb_tol:
        raise PreconditionError(f"unitary reversal requires detailed balance; residual {res:.3e}")
    om = as_array(omega)
    comm = numcore.operator_norm(numcore.commutator(lb.unitary_part.data, om))
    if comm > 1e-10:
        raise PreconditionError(f"[H_eff, Omega] = {comm:.3e}, expected 0")
    theta, m = lb.theta, lb.dissipative
    cross = float(np.max(np.abs(theta @ m - m @ theta)))
    if cross > 1e-9 * max(1.0, float(np.max(np.abs(m)))):
        raise PreconditionError(f"theta and L do not commute (residual {cross:.3e})")
    forward = evolve(lb, t, include_unitary=True)
    backward = Superoperator(superop_expm(t * (m - 1j * theta)))
    p = channels.petz_recovery(forward, om)
    petz_res = float(np.max(np.abs(p.matrix - backward.matrix)))
    double = evolve(lb, 2.0 * t, include_unitary=False)
    comp = channels.compose(p, forward)
    comp_res = float(np.max(np.abs(comp.matrix - double.matrix)))
    return UnitaryReversalReport(petz_res, comp_res)
