"""Entropy-production inequalities for thermalizing semigroups.

Entropy production up to time ``t`` is ``D(rho0 || tau) - D(rho_t || tau)``
(equal to ``beta (F(0) - F(t))`` for a Gibbs ``tau``).  The functions here
evaluate it next to the recovery-based lower bounds: the Petz form, the
doubled-time form ``D(rho0 || rho(2t))`` and its ``k t`` variants, the
fidelity form and the rotated-Petz integral for general channels.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from petzlab import channels, lindblad, numcore
from petzlab.errors import DomainError, PreconditionError
from petzlab.numcore import as_array

SATURATION_TOL = 1e-10
DEFAULT_T_MAX = 5.0
DEFAULT_NODES = 201


def default_grid(rate=1.0, n=60, t_min=1e-3, t_max=50.0):
    """``n`` log-spaced times in ``[t_min, t_max] / rate``."""
    return np.geomspace(t_min, t_max, n) / rate


def _fixed_state(lb):
    tau = lb.declared_fixed_point
    if tau is None:
        raise PreconditionError("generator has no declared fixed point")
    if numcore.eigh(tau).eigenvalues[0] <= numcore.RANK_TOL:
        raise PreconditionError("fixed point must be full rank")
    return tau


def entropy_production(rho0, rhot, tau):
    """``D(rho0 || tau) - D(rhot || tau)`` in nats.

    Raises:
        PreconditionError: if ``tau`` is rank deficient.
    """
    lo = numcore.eigh(tau).eigenvalues[0]
    if lo <= numcore.RANK_TOL:
        raise PreconditionError(f"reference state must be full rank; smallest eigenvalue {lo:.3e}")
    return numcore.relative_entropy(rho0, tau) - numcore.relative_entropy(rhot, tau)


@dataclass(frozen=True)
class RecoveryBoundReport:
    lhs: float
    rhs_petz: float
    rhs_doubled: float
    gap: float
    infinite: bool


def recovery_bound(lb, rho0, t):
    """Entropy production versus ``D(rho0 || Petz(T_t(rho0)))``.

    ``T_t`` is the full semigroup (unitary part included) and the Petz map is
    taken with respect to the declared fixed point.  ``rhs_doubled`` is
    ``D(rho0 || exp(2tL) rho0)`` for cross-checking.  An infinite right-hand
    side is flagged through ``infinite`` rather than raised.
    """
    tau = _fixed_state(lb)
    r0 = as_array(rho0)
    tmap = lindblad.evolve(lb, t, include_unitary=True)
    rt = channels.apply(tmap, r0)
    lhs = entropy_production(r0, rt, tau)
    recovered = channels.apply(channels.petz_recovery(tmap, tau), rt)
    rhs = numcore.relative_entropy(r0, recovered)
    doubled = channels.apply(lindblad.evolve(lb, 2.0 * t, include_unitary=False), r0)
    rhs2 = numcore.relative_entropy(r0, doubled)
    return RecoveryBoundReport(lhs, rhs, rhs2, lhs - rhs, math.isinf(rhs))


@dataclass(frozen=True, eq=False)
class BoundScanResult:
    """Both sides of the doubled-time bound on a time grid.

    ``rhs`` maps each ``k`` to ``D(rho0 || rho(k t))``; ``d_to_fixed`` holds
    ``D(rho(t) || tau)``.
    """

    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: dict
    d_to_fixed: np.ndarray
    d_initial: float = 0.0

    @property
    def k_list(self):
        return list(self.rhs)

    def gap(self, k):
        return self.lhs - self.rhs[k]

    def saturated(self, k):
        return np.abs(self.gap(k)) < SATURATION_TOL

    def holds(self, k, tol=1e-9):
        """True where ``lhs >= rhs_k - tol`` or the two sides are saturated."""
        return self.saturated(k) | (self.gap(k) >= -tol)


def doubled_time_scan(lb, rho0, t_grid=None, k_list=(2.0,)):
    """Scan entropy production and ``D(rho0 || rho(k t))`` over ``t_grid``.

    The left side uses the full semigroup; the right sides always evolve with
    the dissipative part alone.
    """
    tau = _fixed_state(lb)
    r0 = as_array(rho0)
    t_grid = default_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) < 0):
        raise DomainError("t_grid must be ascending")
    full = lindblad.propagator(lb, include_unitary=True)
    diss = lindblad.propagator(lb, include_unitary=False)
    d0 = numcore.relative_entropy(r0, tau)
    lhs = np.empty(len(t_grid))
    dfix = np.empty(len(t_grid))
    rhs = {float(k): np.empty(len(t_grid)) for k in k_list}
    for i, t in enumerate(t_grid):
        rt = channels.apply(full(t), r0)
        dfix[i] = numcore.relative_entropy(rt, tau)
        lhs[i] = d0 - dfix[i]
        for k, out in rhs.items():
            out[i] = numcore.relative_entropy(r0, channels.apply(diss(k * t), r0))
    return BoundScanResult(t_grid, lhs, rhs, dfix, d0)


# names used by the published interface
lemma1_bound = recovery_bound
theorem1_scan = doubled_time_scan


@dataclass(frozen=True)
class QubitFamilyParams:
    """Thermal population ``q``, initial population ``p0`` and relaxation rate ``A``."""

    q: float
    p0: float
    A: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.q < 1.0 and 0.0 < self.p0 < 1.0):
            raise DomainError(f"q and p0 must lie in (0, 1), got q={self.q}, p0={self.p0}")
        if self.A <= 0:
            raise DomainError(f"A must be positive, got {self.A}")

    def population(self, x):
        """Population at ``x = exp(-A t)``."""
        return self.q + x * (self.p0 - self.q)


def _log_pos(v, what):
    if v <= 0.0:
        raise DomainError(f"logarithm of non-positive {what} ({v!r})")
    return math.log(v)


def g_function(x, k, params):
    """Closed form of ``lhs - D(rho0 || rho(k t))`` on the classical qubit family.

    ``x = exp(-A t)``.  With ``d = p0 - q``:

        g = [(q-1) + x d] log(1 - x d/(1-q)) - [q + x d] log(1 + x d/q)
            + (1-p0) log(1 - x^k d/(1-q)) + p0 log(1 + x^k d/q)
    """
    if not 0.0 < x <= 1.0:
        raise DomainError(f"x must lie in (0, 1], got {x!r}")
    if k < 0:
        raise DomainError(f"k must be non-negative, got {k!r}")
    q, p0 = params.q, params.p0
    d = p0 - q
    xk = x ** k
    return ((q - 1.0 + x * d) * _log_pos(1.0 - x * d / (1.0 - q), "1 - x(p0-q)/(1-q)")
            - (q + x * d) * _log_pos(1.0 + x * d / q, "1 + x(p0-q)/q")
            + (1.0 - p0) * _log_pos(1.0 - xk * d / (1.0 - q), "1 - x^k(p0-q)/(1-q)")
            + p0 * _log_pos(1.0 + xk * d / q, "1 + x^k(p0-q)/q"))


def binary_divergence(p, q):
    """Classical relative entropy between ``(p, 1-p)`` and ``(q, 1-q)``."""
    out = 0.0
    for a, b in ((p, q), (1.0 - p, 1.0 - q)):
        if a > 0.0:
            if b <= 0.0:
                return math.inf
            out += a * math.log(a / b)
    return out


@dataclass(frozen=True)
class SpohnRate:
    """Instantaneous entropy production rate.

    ``rate`` is ``inf`` when ``divergent``; ``support_term`` is
    ``Tr[L(rho) P_rho]`` with ``P_rho`` the support projector of ``rho``.
    """

    rate: float
    log_term: float
    support_term: float
    divergent: bool


def spohn_rate(lb, rho, tau=None):
    """Entropy production rate ``-d/dt D(rho(t) || tau)`` at ``rho``.

    Evaluates ``Tr[L(rho)(log tau - log rho)] - Tr[L(rho) P_rho]`` on the
    support of ``rho``, which is ``-dD/dt`` wherever the derivative is finite.
    When ``L(rho)`` leaks out of the support the rate diverges and the result
    carries ``divergent=True``.  ``tau`` defaults to the declared fixed point.
    """
    if tau is None:
        tau = _fixed_state(lb)
    r = as_array(rho)
    lr = numcore.hermitize(lb(r))
    spec = numcore.psd_eigh(r)
    w, v = spec.eigenvalues, spec.eigenvectors
    on = w > 0.0
    vs = v[:, on]
    proj = vs @ vs.conj().T
    support_term = float(np.real(np.trace(lr @ proj)))
    leak = lr - proj @ lr @ proj
    scale = max(1.0, float(np.max(np.abs(lr))))
    if float(np.max(np.abs(leak))) > 1e-12 * scale:
        return SpohnRate(math.inf, math.inf, support_term, True)
    log_rho = (vs * np.log(w[on])) @ vs.conj().T
    log_tau = numcore.psd_log(tau)
    log_term = float(np.real(np.trace(lr @ (log_tau - log_rho))))
    return SpohnRate(log_term - support_term, log_term, support_term, False)


@dataclass(frozen=True, eq=False)
class InfinitesimalReport:
    h: np.ndarray
    quotients: np.ndarray
    slope: float
    support_grows: bool
    predicted_limit: float


def infinitesimal_rhs_limit(lb, rho, h_list):
    """``D(rho || rho(2h)) / h`` for each ``h`` (dissipative evolution).

    ``slope`` is the least-squares slope of ``log quotient`` against
    ``log h`` (about 1 for full-rank ``rho``).  ``predicted_limit`` is
    ``-2 Tr[L(rho) P_rho]``; ``support_grows`` flags states whose support
    ``L`` enlarges, for which the quotient tends to that non-zero limit.
    """
    r = as_array(rho)
    h = np.asarray(h_list, dtype=float)
    prop = lindblad.propagator(lb, include_unitary=False)
    q = np.array([numcore.relative_entropy(r, channels.apply(prop(2.0 * hh), r)) / hh
                  for hh in h])
    positive = q > 0
    if np.count_nonzero(positive) >= 2:
        slope = float(np.polyfit(np.log(h[positive]), np.log(q[positive]), 1)[0])
    else:
        slope = float("nan")
    lr = numcore.hermitize(lb(r))
    proj = numcore.support_projector(r)
    leak = lr - proj @ lr @ proj
    scale = max(1.0, float(np.max(np.abs(lr))))
    grows = bool(float(np.max(np.abs(leak))) > 1e-12 * scale)
    limit = -2.0 * float(np.real(np.trace(lr @ proj)))
    return InfinitesimalReport(h, q, slope, grows, limit)


@dataclass(frozen=True)
class FidelityReport:
    lhs: float
    rhs_fid: float
    rhs_relent: float


def fidelity_bound(lb, rho0, t, hypothesis_tol=1e-8):
    """Entropy production against ``-2 log F(rho0, rho(2t))``.

    Also returns ``rhs_relent = D(rho0 || rho(2t))``, which dominates the
    fidelity form.

    Raises:
        PreconditionError: if detailed balance or time-translation symmetry
            about the fixed point fails beyond ``hypothesis_tol``.
    """
    tau = _fixed_state(lb)
    qdb = lindblad.check_qdb(lb, tau)
    tts = lindblad.check_ttsfp(lb, tau)
    if qdb > hypothesis_tol or tts > hypothesis_tol:
        raise PreconditionError(
            f"fidelity bound needs QDB and TTSFP (residuals {qdb:.3e}, {tts:.3e})")
    r0 = as_array(rho0)
    rt = channels.apply(lindblad.evolve(lb, t, include_unitary=True), r0)
    lhs = entropy_production(r0, rt, tau)
    r2t = channels.apply(lindblad.evolve(lb, 2.0 * t, include_unitary=False), r0)
    f = numcore.fidelity(r0, r2t)
    rhs_fid = -2.0 * math.log(f) if f > 0 else math.inf
    return FidelityReport(lhs, max(rhs_fid, 0.0), numcore.relative_entropy(r0, r2t))


def rotation_density(t):
    """Probability density ``pi / (2 (cosh(pi t) + 1))`` weighting the rotations."""
    return 0.5 * math.pi / (np.cosh(math.pi * np.asarray(t, dtype=float)) + 1.0)


def truncated_mass(t_max):
    """Mass of the rotation density outside ``[-t_max, t_max]``."""
    # the CDF is (1 + tanh(pi t / 2)) / 2
    return 1.0 - math.tanh(0.5 * math.pi * t_max)


@dataclass(frozen=True, eq=False)
class UniversalBoundReport:
    lhs: float
    rhs_int: float
    t_max: float
    nodes: int
    truncation_mass: float
    t_nodes: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)


def universal_bound_integral(s, sigma, rho, t_max=DEFAULT_T_MAX, nodes=DEFAULT_NODES):
    """Relative-entropy drop under ``s`` against the rotated-Petz fidelity integral.

    ``rhs_int = -2 int p(t) log F(rho, R_t(S(rho))) dt`` with ``R_t`` the
    rotated Petz map, by the trapezoid rule on ``nodes`` points over
    ``[-t_max, t_max]``.
    """
    r, sig = as_array(rho), as_array(sigma)
    s_rho = channels.apply(s, r)
    lhs = numcore.relative_entropy(r, sig) - numcore.relative_entropy(s_rho, channels.apply(s, sig))
    ts = np.linspace(-t_max, t_max, nodes)
    vals = np.empty(nodes)
    for i, t in enumerate(ts):
        rec = channels.apply(channels.rotated_petz(s, sig, float(t)), s_rho)
        f = numcore.fidelity(r, rec)
        vals[i] = -2.0 * math.log(f) if f > 0 else math.inf
    rhs = float(np.trapezoid(rotation_density(ts) * vals, ts))
    return UniversalBoundReport(lhs, rhs, t_max, nodes, truncated_mass(t_max), ts, vals)


def log_derivative_integral(a, b, nodes=101):
    """``int_0^1 M(x)^-1 B M(x)^-1 dx`` with ``M(x) = (1-x) A + x I``, by trapezoid."""
    a, b = as_array(a), as_array(b)
    eye = np.eye(a.shape[0])
    xs = np.linspace(0.0, 1.0, nodes)
    vals = []
    for x in xs:
        inv = np.linalg.inv((1.0 - x) * a + x * eye)
        vals.append(inv @ b @ inv)
    return np.trapezoid(np.array(vals), xs, axis=0)


def log_perturbation_remainder(a, b, s, nodes=101):
    """Operator norm of ``log(A + sB) - log A - s * log_derivative_integral(A, B)``."""
    a, b = as_array(a), as_array(b)
    diff = numcore.psd_log(a + s * b) - numcore.psd_log(a) - s * log_derivative_integral(a, b, nodes)
    return numcore.operator_norm(numcore.hermitize(diff))
