"""Exact dynamics of a system coupled to a truncated thermal bath.

The joint Hamiltonian is ``H_S (x) I + I (x) H_B + lambda * I_int`` on the
system-first tensor product; the bath starts in its Gibbs state.
"""

from dataclasses import dataclass
import math

import numpy as np

from petzlab import channels, lindblad, numcore
from petzlab.errors import ConstructionError, DimensionError
from petzlab.numcore import HermitianOperator, as_array

MAX_JOINT_DIM = 64


@dataclass(frozen=True, eq=False)
class BathModel:
    """Truncated bath: ``levels`` states, Hamiltonian, temperature, coupling."""

    H_B: HermitianOperator
    beta: float
    interaction: HermitianOperator
    lam: float = 0.0

    def __post_init__(self):
        if not isinstance(self.H_B, HermitianOperator):
            object.__setattr__(self, "H_B", HermitianOperator(self.H_B))
        if not isinstance(self.interaction, HermitianOperator):
            object.__setattr__(self, "interaction", HermitianOperator(self.interaction))
        if self.lam < 0:
            raise ConstructionError(f"coupling strength must be non-negative, got {self.lam}")
        if self.beta <= 0:
            raise ConstructionError(f"beta must be positive, got {self.beta}")
        if self.interaction.dim % self.levels:
            raise DimensionError(f"interaction dimension {self.interaction.dim} is not a "
                                 f"multiple of the bath size {self.levels}")

    @property
    def levels(self):
        return self.H_B.dim

    def with_lambda(self, lam):
        return BathModel(self.H_B, self.beta, self.interaction, lam)


def ladder_bath(levels, omega, beta, lam, system_dim=2):
    """Harmonic ladder bath with a flip-hop coupling of unit operator norm.

    ``H_B = diag(0, w, 2w, ...)``; the interaction is ``X_S (x) (b + b^H)``
    with ``X_S`` the system flip between its first two levels and ``b`` the
    ladder lowering operator, rescaled to operator norm 1.
    """
    hb = np.diag(omega * np.arange(levels, dtype=float))
    b = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)
    xs = np.zeros((system_dim, system_dim))
    xs[0, 1] = xs[1, 0] = 1.0
    inter = np.kron(xs, b + b.T)
    inter = inter / numcore.operator_norm(inter)
    return BathModel(HermitianOperator(hb), beta, HermitianOperator(inter), lam)


def truncate_bath(h_b_full, interaction_full, system_dim, n):
    """Project a bath onto its ``n`` lowest energy eigenvectors.

    Returns ``(H_B^(n), I_n)`` expressed in the truncated eigenbasis.
    """
    spec = numcore.eigh(h_b_full)
    p = spec.eigenvectors[:, :n]
    hb = np.diag(spec.eigenvalues[:n]).astype(np.complex128)
    iso = np.kron(np.eye(system_dim), p)
    inter = iso.conj().T @ as_array(interaction_full) @ iso
    return HermitianOperator(hb), HermitianOperator(inter)


def joint_hamiltonian(h_s, bath):
    hs = as_array(h_s)
    ds, n = hs.shape[0], bath.levels
    if bath.interaction.dim != ds * n:
        raise DimensionError(f"interaction has dimension {bath.interaction.dim}, "
                             f"expected {ds * n}")
    h = (np.kron(hs, np.eye(n)) + np.kron(np.eye(ds), bath.H_B.data)
         + bath.lam * bath.interaction.data)
    return HermitianOperator(h)


def _check_cap(h_s, bath):
    dim = as_array(h_s).shape[0] * bath.levels
    if dim > MAX_JOINT_DIM:
        raise DimensionError(f"joint dimension {dim} exceeds the cap of {MAX_JOINT_DIM}")


def joint_unitary(h_s, bath, t_tilde):
    """``exp(-i t H_SB)`` via the Jacobi spectrum of ``H_SB``."""
    _check_cap(h_s, bath)
    return numcore.matfunc(joint_hamiltonian(h_s, bath), lambda w: np.exp(-1j * t_tilde * w))


def partial_trace_bath(joint, system_dim, levels):
    return np.trace(joint.reshape(system_dim, levels, system_dim, levels), axis1=1, axis2=3)


def joint_state(h_s, bath, rho_s, t_tilde):
    """Joint state ``U (rho_S (x) tau_B) U^H`` after time ``t_tilde``."""
    u = joint_unitary(h_s, bath, t_tilde)
    tau_b = numcore.gibbs(bath.H_B, bath.beta).data
    rho0 = np.kron(as_array(rho_s), tau_b)
    return numcore.hermitize(u @ rho0 @ u.conj().T)


def joint_evolve(h_s, bath, rho_s, t_tilde):
    """Reduced system state after exact joint evolution for ``t_tilde``."""
    ds = as_array(h_s).shape[0]
    joint = joint_state(h_s, bath, rho_s, t_tilde)
    return numcore.DensityMatrix.from_array(partial_trace_bath(joint, ds, bath.levels),
                                            renormalize=True)


@dataclass(frozen=True)
class CorrelationReport:
    """Both sides of the fixed-point correlation bound.

    ``lhs``/``rhs`` use the half trace norm against ``Z beta sqrt(lambda ||I||)``;
    ``lhs_full``/``rhs_full`` are the unhalved norm against twice that value.
    """

    lhs: float
    rhs: float
    lhs_full: float
    rhs_full: float
    partition: float

    @property
    def passed(self):
        return self.lhs <= self.rhs * (1.0 + 1e-9) + 1e-15


def correlation_bound_check(h_s, bath, alpha, t_tilde):
    """Check ``1/2 ||U G^a U^H - G^a||_1 <= Tr[G^a] beta sqrt(lambda ||I||)``.

    ``G = tau_S (x) tau_B`` is the product of Gibbs states of ``H_S`` and
    ``H_B`` at the bath temperature and ``U`` the joint propagator.
    """
    if alpha <= 0:
        raise ConstructionError(f"alpha must be positive, got {alpha}")
    _check_cap(h_s, bath)
    tau_s = numcore.gibbs(h_s, bath.beta).data
    tau_b = numcore.gibbs(bath.H_B, bath.beta).data
    g_alpha = numcore.matfunc(np.kron(tau_s, tau_b), lambda w: np.clip(w, 0.0, None) ** alpha)
    z = float(np.real(np.trace(g_alpha)))
    if bath.lam == 0.0:
        # the uncoupled propagator is a function of H_S + H_B and commutes with G
        return CorrelationReport(0.0, 0.0, 0.0, 0.0, z)
    u = joint_unitary(h_s, bath, t_tilde)
    diff = numcore.hermitize(u @ g_alpha @ u.conj().T - g_alpha)
    full = numcore.trace_norm(diff)
    norm_i = numcore.operator_norm(bath.interaction)
    rhs = z * bath.beta * math.sqrt(bath.lam * norm_i)
    return CorrelationReport(0.5 * full, rhs, full, 2.0 * rhs, z)


def energy_drift(h_s, bath, rho_s, t_tilde):
    """``|Tr[H_SB rho(t)] - Tr[H_SB rho(0)]|`` for the product initial state."""
    h = joint_hamiltonian(h_s, bath).data
    tau_b = numcore.gibbs(bath.H_B, bath.beta).data
    rho0 = np.kron(as_array(rho_s), tau_b)
    rho_t = joint_state(h_s, bath, rho_s, t_tilde)
    return abs(float(np.real(np.trace(h @ rho_t) - np.trace(h @ rho0))))


def davies_limit_probe(h_s, bath_family, lb, rho_s, t):
    """Trace distances between the reduced dynamics and ``exp(tL)`` at fixed ``t``.

    For each member with coupling ``lambda > 0`` the joint system runs for
    ``t / lambda**2``; the free system rotation is undone (interaction
    picture) before comparing with the dissipative semigroup.  A
    ``lambda = 0`` member leaves the interaction-picture state at ``rho_s``.
    """
    hs = as_array(h_s)
    rs = as_array(rho_s)
    target = channels.apply(lindblad.evolve(lb, t, include_unitary=False), rs).data
    out = []
    for bath in bath_family:
        if bath.lam == 0.0 or t == 0.0:
            reduced = rs
        else:
            t_tilde = t / bath.lam ** 2
            lab = joint_evolve(hs, bath, rs, t_tilde).data
            back = numcore.matfunc(hs, lambda w: np.exp(1j * t_tilde * w))
            reduced = back @ lab @ back.conj().T
        out.append(numcore.trace_norm(numcore.hermitize(reduced - target)))
    return np.array(out)
