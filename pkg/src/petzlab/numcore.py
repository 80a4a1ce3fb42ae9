"""Hermitian linear algebra and entropic functionals on density matrices.

All logarithms are natural, so entropies and divergences are in nats.
Functions accept either the typed wrappers defined here or plain square
``numpy`` arrays.
"""

from dataclasses import dataclass
import math

import numpy as np

from petzlab._kernels import jacobi_eigh
from petzlab.errors import (
    ConsistencyError,
    ConvergenceError,
    DimensionError,
    DomainError,
    ValidationError,
)

HERMITIAN_TOL = 1e-12
HERMITIAN_REJECT = 1e-8
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
RANK_TOL = 1e-12
MAX_SWEEPS = 100


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    return a


def as_array(x):
    """Return the complex ndarray behind ``x`` (a wrapper or array-like)."""
    if isinstance(x, (HermitianOperator, DensityMatrix)):
        return x.data
    return _square(x)


def hermitize(a):
    return 0.5 * (a + a.conj().T)


def _check_hermitian(a, name):
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if asym > HERMITIAN_REJECT:
        raise ValidationError(f"{name} is not Hermitian (asymmetry {asym:.3e})")
    return hermitize(a)


def _freeze(a):
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Square complex Hermitian matrix, symmetrized on construction."""

    data: np.ndarray

    def __post_init__(self):
        a = _check_hermitian(_square(self.data, "operator"), "operator")
        object.__setattr__(self, "data", _freeze(a))

    @property
    def dim(self):
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    data: np.ndarray

    def __post_init__(self):
        a = _check_hermitian(_square(self.data, "state"), "state")
        tr = complex(np.trace(a))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"state trace is {tr.real:.12g}, expected 1")
        lo = float(eigh(a).eigenvalues[0])
        if lo < -PSD_TOL:
            raise ValidationError(f"state has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "data", _freeze(a))

    @classmethod
    def from_array(cls, a, *, renormalize=False):
        """Build a state after symmetrizing and clamping eigenvalue dust.

        Eigenvalues in ``(-PSD_TOL, 0)`` are set to zero; with
        ``renormalize`` the trace is rescaled to one.
        """
        a = hermitize(_square(a, "state"))
        spec = eigh(a)
        w = spec.eigenvalues
        if w[0] < -PSD_TOL:
            raise ValidationError(f"state has negative eigenvalue {w[0]:.3e}")
        if w[0] < 0.0:
            w = np.clip(w, 0.0, None)
            a = (spec.eigenvectors * w) @ spec.eigenvectors.conj().T
        if renormalize:
            a = a / np.trace(a).real
        return cls(a)

    @property
    def dim(self):
        return self.data.shape[0]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh(h):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Raises:
        ConvergenceError: if the sweep cap is reached; carries the remaining
            off-diagonal norm as ``residual``.
    """
    a = hermitize(as_array(h))
    w, v, sweeps, off = jacobi_eigh(a, 1e-15, MAX_SWEEPS)
    if sweeps > MAX_SWEEPS:
        raise ConvergenceError(
            f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps "
            f"(off-diagonal norm {off:.3e})",
            residual=off,
        )
    order = np.argsort(w, kind="stable")
    return Spectrum(w[order], v[:, order])


def matfunc(h, f):
    """Apply a scalar function to a Hermitian matrix, ``V f(diag w) V^H``.

    ``f`` must accept a 1-D array of eigenvalues.  Non-finite output on any
    eigenvalue raises :class:`DomainError`.
    """
    spec = eigh(h)
    w = spec.eigenvalues
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=np.complex128)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        raise DomainError(f"function is not finite at eigenvalue {w[bad][0]!r}")
    v = spec.eigenvectors
    return (v * fw) @ v.conj().T


def psd_eigh(rho):
    """Spectrum of a state with eigenvalues below ``RANK_TOL`` clamped to 0."""
    spec = eigh(rho)
    w = spec.eigenvalues
    if w[0] < -PSD_TOL:
        raise ValidationError(f"negative eigenvalue {w[0]:.3e}")
    w = np.where(w < RANK_TOL, 0.0, w)
    return Spectrum(w, spec.eigenvectors)


def psd_power(rho, power):
    """``rho**power`` on the support; requires full rank for negative powers."""
    spec = psd_eigh(rho)
    w = spec.eigenvalues
    if np.real(power) < 0 and w[0] <= 0.0:
        raise DomainError(f"negative power of a singular matrix (eigenvalue {w[0]!r})")
    with np.errstate(divide="ignore"):
        fw = np.where(w > 0.0, np.power(np.where(w > 0.0, w, 1.0), power), 0.0)
    v = spec.eigenvectors
    return (v * fw) @ v.conj().T


def psd_log(rho):
    """Matrix logarithm of a full-rank positive matrix."""
    spec = psd_eigh(rho)
    w = spec.eigenvalues
    if w[0] <= 0.0:
        raise DomainError(f"log of a singular matrix (eigenvalue {w[0]!r})")
    v = spec.eigenvectors
    return (v * np.log(w)) @ v.conj().T


def support_projector(rho):
    spec = psd_eigh(rho)
    v = spec.eigenvectors[:, spec.eigenvalues > 0.0]
    return v @ v.conj().T


def trace_norm(m):
    """Sum of singular values.  Hermitian input uses the Jacobi spectrum."""
    a = as_array(m)
    if np.allclose(a, a.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        return float(np.sum(np.abs(eigh(a).eigenvalues)))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def operator_norm(m):
    a = as_array(m)
    if np.allclose(a, a.conj().T, rtol=0.0, atol=HERMITIAN_TOL):
        return float(np.max(np.abs(eigh(a).eigenvalues)))
    return float(np.linalg.svd(a, compute_uv=False)[0])


def gibbs(h, beta):
    """Thermal state ``exp(-beta H) / Z``.

    The spectrum is shifted by its minimum before exponentiation so every
    exponent is non-positive.
    """
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(f"beta must be finite and positive, got {beta!r}")
    spec = eigh(h)
    w = spec.eigenvalues
    boltz = np.exp(-beta * (w - w[0]))
    p = boltz / boltz.sum()
    v = spec.eigenvectors
    return DensityMatrix((v * p) @ v.conj().T)


def log_partition(h, beta):
    """``log Tr exp(-beta H)`` evaluated without overflow."""
    w = eigh(h).eigenvalues
    return float(-beta * w[0] + np.log(np.sum(np.exp(-beta * (w - w[0])))))


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")


def relative_entropy(rho, sigma):
    """Umegaki relative entropy ``Tr rho (log rho - log sigma)`` in nats.

    Returns ``math.inf`` when the support of ``rho`` is not contained in the
    support of ``sigma``, and exactly 0 when the result is below the rounding
    error of the difference of the two traces.
    """
    r_arr, s_arr = as_array(rho), as_array(sigma)
    _same_dim(r_arr, s_arr)
    rs = psd_eigh(r_arr)
    ss = psd_eigh(s_arr)
    r, s = rs.eigenvalues, ss.eigenvalues
    # overlap[i, j] = |<s_j | r_i>|^2
    overlap = np.abs(ss.eigenvectors.conj().T @ rs.eigenvectors).T ** 2
    on_r = r > 0.0
    weight_outside = float(np.sum(r[:, None] * overlap[:, s <= 0.0]))
    if weight_outside > RANK_TOL:
        return math.inf
    s_log = np.where(s > 0.0, np.log(np.where(s > 0.0, s, 1.0)), 0.0)
    term_rho = float(np.sum(r[on_r] * np.log(r[on_r])))
    term_cross = float(np.sum(r[:, None] * overlap * s_log[None, :]))
    value = term_rho - term_cross
    # below the cancellation error of the two traces the sign is meaningless
    if value <= 8.0 * np.finfo(float).eps * (abs(term_rho) + abs(term_cross)):
        return 0.0
    return value


def von_neumann_entropy(rho):
    r = psd_eigh(rho).eigenvalues
    r = r[r > 0.0]
    return max(float(-np.sum(r * np.log(r))), 0.0)


def free_energy(rho, h, beta):
    """``Tr[H rho] + Tr[rho log rho] / beta`` in the energy units of ``h``."""
    beta = float(beta)
    if not math.isfinite(beta) or beta <= 0.0:
        raise DomainError(f"beta must be finite and positive, got {beta!r}")
    r_arr, h_arr = as_array(rho), as_array(h)
    _same_dim(r_arr, h_arr)
    energy = float(np.real(np.trace(h_arr @ r_arr)))
    return energy - von_neumann_entropy(r_arr) / beta


def fidelity(rho, sigma):
    """Root fidelity ``Tr sqrt(sqrt(sigma) rho sqrt(sigma))`` in [0, 1]."""
    r_arr, s_arr = as_array(rho), as_array(sigma)
    _same_dim(r_arr, s_arr)
    root = psd_power(s_arr, 0.5)
    inner = hermitize(root @ r_arr @ root)
    w = eigh(inner).eigenvalues
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    if f > 1.0 + PSD_TOL or f < -PSD_TOL:
        raise ConsistencyError(f"fidelity {f!r} outside [0, 1]; inputs are not states")
    return min(max(f, 0.0), 1.0)


def trace_distance(rho, sigma):
    return 0.5 * trace_norm(as_array(rho) - as_array(sigma))


def commutator(a, b):
    return a @ b - b @ a
