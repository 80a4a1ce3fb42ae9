"""Superoperators on column-stacked matrices and Petz recovery maps.

Convention: ``vec(X)`` stacks the columns of ``X``, so that

    vec(A X B) = (B^T kron A) vec(X).

With this convention the Hilbert-Schmidt inner product ``Tr[A^H B]`` is
``vec(A)^H vec(B)`` and the adjoint of a superoperator is the conjugate
transpose of its matrix.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from petzlab import numcore
from petzlab.errors import (
    ConsistencyError,
    ConvergenceError,
    DimensionError,
    PreconditionError,
)
from petzlab.numcore import DensityMatrix, as_array


def vec(x):
    return np.asarray(x, dtype=np.complex128).reshape(-1, order="F")


def unvec(v, dim):
    return np.asarray(v).reshape(dim, dim, order="F")


def sandwich(left, right):
    """Superoperator matrix of ``X -> left @ X @ right``."""
    return np.kron(np.asarray(right).T, np.asarray(left))


@dataclass(frozen=True, eq=False)
class CPTPReport:
    cp_residual: float
    tp_residual: float
    tol: float

    @property
    def passed(self):
        return self.cp_residual <= self.tol and self.tp_residual <= self.tol


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on ``dim x dim`` matrices stored as a ``dim**2`` square matrix."""

    matrix: np.ndarray
    cptp: CPTPReport | None = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        n = m.shape[0]
        d = math.isqrt(n)
        if m.ndim != 2 or m.shape[1] != n or d * d != n or n == 0:
            raise DimensionError(f"superoperator matrix must be d^2 x d^2, got {m.shape}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return math.isqrt(self.matrix.shape[0])

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim * dim, dtype=np.complex128))

    @classmethod
    def from_kraus(cls, kraus_ops):
        ops = [np.asarray(k, dtype=np.complex128) for k in kraus_ops]
        return cls(sum(sandwich(k, k.conj().T) for k in ops))

    @classmethod
    def conjugation(cls, u):
        """``X -> U X U^H``."""
        u = np.asarray(u, dtype=np.complex128)
        return cls(sandwich(u, u.conj().T))

    def __call__(self, x):
        """Apply to an arbitrary matrix without state post-processing."""
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.dim, self.dim):
            raise DimensionError(f"operand shape {x.shape} does not match map dimension {self.dim}")
        return unvec(self.matrix @ vec(x), self.dim)


def apply(s, rho):
    """Apply ``s`` to a state and return a cleaned-up :class:`DensityMatrix`.

    Output is symmetrized and eigenvalue dust above ``-1e-10`` clamped.

    Raises:
        ConsistencyError: if the output trace is off by more than 1e-6.
    """
    r = as_array(rho)
    out = numcore.hermitize(s(r))
    tr = float(np.real(np.trace(out)))
    if abs(tr - 1.0) > 1e-6:
        raise ConsistencyError(f"map output has trace {tr:.9g}; map is not trace preserving")
    return DensityMatrix.from_array(out / tr)


def adjoint(s):
    return Superoperator(s.matrix.conj().T)


def compose(s2, s1):
    """``s2 after s1``."""
    if s2.dim != s1.dim:
        raise DimensionError(f"cannot compose maps of dimension {s2.dim} and {s1.dim}")
    return Superoperator(s2.matrix @ s1.matrix)


def choi(s):
    """Choi matrix ``sum_ij |i><j| (x) S(|i><j|)``, input factor first."""
    d = s.dim
    # column i + d*j of s.matrix is vec(S(|i><j|)); reshape to S(E_ij)[a, b]
    blocks = s.matrix.reshape(d, d, d, d, order="F")  # [a, b, i, j]
    return blocks.transpose(2, 0, 3, 1).reshape(d * d, d * d)


def is_cptp(s, tol=1e-8):
    """Complete positivity and trace preservation residuals of ``s``.

    ``cp_residual`` is the magnitude of the most negative Choi eigenvalue,
    ``tp_residual`` the max-norm deviation of the output-traced Choi matrix
    from the identity.
    """
    c = choi(s)
    d = s.dim
    herm_err = float(np.max(np.abs(c - c.conj().T)))
    w = numcore.eigh(numcore.hermitize(c)).eigenvalues
    cp_res = max(-float(w[0]), 0.0) + herm_err
    partial = np.trace(c.reshape(d, d, d, d), axis1=1, axis2=3)
    tp_res = float(np.max(np.abs(partial - np.eye(d))))
    return CPTPReport(cp_res, tp_res, tol)


def checked(s, tol=1e-8):
    """Return ``s`` with its CPTP report attached."""
    return Superoperator(s.matrix, cptp=is_cptp(s, tol))


@dataclass(frozen=True, eq=False)
class FixedPoint:
    state: DensityMatrix
    unique: bool
    multiplicity: int
    residual: float


def fixed_point(s, tol=1e-9, max_iter=100_000):
    """Fixed state of a CPTP map by shifted power iteration.

    Iterates ``(S + I)/2`` from the all-ones vector; the shift damps
    eigenvalues of modulus one other than 1 itself.  ``unique`` is False when
    the eigenvalue-1 eigenspace of ``s`` has dimension above one.

    Raises:
        ConvergenceError: if ``s`` has no eigenvalue within ``tol`` of 1 or
            the iteration stalls.
    """
    d = s.dim
    n = d * d
    eigvals = np.linalg.eigvals(s.matrix)
    near_one = np.abs(eigvals - 1.0) <= tol
    multiplicity = int(np.count_nonzero(near_one))
    if multiplicity == 0:
        closest = eigvals[np.argmin(np.abs(eigvals - 1.0))]
        raise ConvergenceError(f"no eigenvalue within {tol:g} of 1 (closest {closest:.6g})",
                               residual=float(abs(closest - 1.0)))
    m = 0.5 * (s.matrix + np.eye(n))
    x = vec(np.ones((d, d)) / d)
    residual = math.inf
    for _ in range(max_iter):
        y = m @ x
        tr = np.trace(unvec(y, d))
        if abs(tr) < 1e-300:
            raise ConvergenceError("power iteration collapsed to a traceless operator")
        y = y / tr
        residual = float(np.max(np.abs(y - x)))
        x = y
        if residual < 1e-12:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} steps",
                               residual=residual)
    state = DensityMatrix.from_array(unvec(x, d), renormalize=True)
    fp_res = float(np.max(np.abs(s(state.data) - state.data)))
    return FixedPoint(state, multiplicity == 1, multiplicity, fp_res)


def _full_rank_powers(state, name):
    spec = numcore.eigh(as_array(state))
    lo = float(spec.eigenvalues[0])
    if lo <= numcore.RANK_TOL:
        raise PreconditionError(f"{name} must be full rank; smallest eigenvalue is {lo:.3e}")
    return spec


def _power_from(spec, power):
    v = spec.eigenvectors
    return (v * np.power(spec.eigenvalues.astype(np.complex128), power)) @ v.conj().T


def petz_recovery(s, sigma):
    """Petz map ``X -> sigma^1/2 S^H(S(sigma)^-1/2 X S(sigma)^-1/2) sigma^1/2``.

    Raises:
        PreconditionError: if ``sigma`` or ``S(sigma)`` is rank deficient.
    """
    sig = as_array(sigma)
    out = numcore.hermitize(s(sig))
    sig_spec = _full_rank_powers(sig, "reference state")
    out_spec = _full_rank_powers(out, "image of the reference state")
    sig_half = _power_from(sig_spec, 0.5)
    out_mhalf = _power_from(out_spec, -0.5)
    m = sandwich(sig_half, sig_half) @ s.matrix.conj().T @ sandwich(out_mhalf, out_mhalf)
    return Superoperator(m)


def rotated_petz(s, sigma, t):
    """Petz map conjugated by the modular flows of ``sigma`` and ``S(sigma)``.

    ``X -> sigma^it P(S(sigma)^-it X S(sigma)^it) sigma^-it`` with ``P`` the
    Petz map; ``t == 0`` returns the Petz map itself.
    """
    p = petz_recovery(s, sigma)
    if t == 0:
        return p
    sig = as_array(sigma)
    sig_spec = numcore.eigh(sig)
    out_spec = numcore.eigh(numcore.hermitize(s(sig)))
    sig_p = _power_from(sig_spec, 1j * t)
    sig_m = _power_from(sig_spec, -1j * t)
    out_p = _power_from(out_spec, 1j * t)
    out_m = _power_from(out_spec, -1j * t)
    m = sandwich(sig_p, sig_m) @ p.matrix @ sandwich(out_m, out_p)
    return Superoperator(m)


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    d_drop: float
    recovered_rho: DensityMatrix
    exact: bool
    recovery_error: float


def recovery_check(s, rho, sigma):
    """Compare the relative-entropy drop under ``s`` with Petz recoverability.

    ``exact`` is True when the drop is below 1e-9; in that case the
    recovered state must match ``rho`` within 1e-6 in trace norm.
    """
    r, sig = as_array(rho), as_array(sigma)
    s_rho = apply(s, r)
    s_sig = apply(s, sig)
    drop = numcore.relative_entropy(r, sig) - numcore.relative_entropy(s_rho, s_sig)
    recovered = apply(petz_recovery(s, sig), s_rho)
    err = numcore.trace_norm(recovered.data - r)
    exact = drop < 1e-9
    if exact and err >= 1e-6:
        raise ConsistencyError(
            f"relative entropy preserved (drop {drop:.3e}) but recovery error is {err:.3e}")
    return RecoveryReport(drop, recovered, exact, err)
