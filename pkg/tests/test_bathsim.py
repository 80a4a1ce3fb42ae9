import math

import numpy as np
import pytest

from petzlab import bathsim, channels, lindblad, numcore
from petzlab.bathsim import BathModel, correlation_bound_check, joint_evolve, ladder_bath
from petzlab.ensemble import random_bath, random_hermitian, random_state
from petzlab.errors import ConstructionError, DimensionError

H_S = np.diag([1.0, 0.0])


def test_uncoupled_evolution_is_free_rotation(rng):
    hs = random_hermitian(rng, 2).data
    rho = random_state(rng, 2)
    bath = random_bath(rng, 4, 0.0, 1.0)
    t = 2.3
    u = numcore.matfunc(hs, lambda w: np.exp(-1j * t * w))
    out = joint_evolve(hs, bath, rho, t)
    assert np.max(np.abs(out.data - u @ rho.data @ u.conj().T)) < 1e-12


def test_zero_time_leaves_state(rng):
    rho = random_state(rng, 2)
    out = joint_evolve(H_S, random_bath(rng, 4, 0.05, 1.0), rho, 0.0)
    assert np.max(np.abs(out.data - rho.data)) < 1e-14


def test_reduced_state_has_unit_trace(rng):
    for _ in range(5):
        bath = random_bath(rng, 6, rng.uniform(0, 0.1), 1.5)
        out = joint_evolve(H_S, bath, random_state(rng, 2), rng.uniform(0, 20))
        assert abs(np.trace(out.data) - 1.0) < 1e-10


def test_energy_and_purity_conserved(rng):
    bath = random_bath(rng, 8, 0.1, 2.0)
    rho = random_state(rng, 2)
    assert bathsim.energy_drift(H_S, bath, rho, 15.0) < 1e-9
    tau_b = numcore.gibbs(bath.H_B, bath.beta).data
    before = np.kron(rho.data, tau_b)
    after = bathsim.joint_state(H_S, bath, rho, 15.0)
    assert abs(np.trace(after @ after) - np.trace(before @ before)) < 1e-10


def test_joint_dimension_cap(rng):
    bath = ladder_bath(40, 1.0, 1.0, 0.1)
    with pytest.raises(DimensionError):
        joint_evolve(H_S, bath, np.eye(2) / 2, 1.0)
    with pytest.raises(DimensionError):
        correlation_bound_check(H_S, bath, 1.0, 1.0)


def test_bath_model_validation():
    with pytest.raises(ConstructionError):
        BathModel(np.eye(2), 1.0, np.eye(4), -0.1)
    with pytest.raises(DimensionError):
        BathModel(np.eye(3), 1.0, np.eye(4))


def test_ladder_coupling_normalized():
    bath = ladder_bath(5, 0.7, 1.0, 0.02)
    assert numcore.operator_norm(bath.interaction) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.diag(bath.H_B.data).real, 0.7 * np.arange(5))


def test_truncation_keeps_lowest_levels(rng):
    hb = random_hermitian(rng, 6)
    inter = random_hermitian(rng, 12)
    hb_n, inter_n = bathsim.truncate_bath(hb, inter, 2, 3)
    assert np.allclose(np.diag(hb_n.data).real, np.linalg.eigvalsh(hb.data)[:3], atol=1e-12)
    assert inter_n.dim == 6


# -- correlation bound

def test_correlation_bound_uncoupled(rng):
    rep = correlation_bound_check(H_S, random_bath(rng, 4, 0.0, 1.0), 1.0, 10.0)
    assert (rep.lhs, rep.rhs) == (0.0, 0.0) and rep.passed


def test_uncoupled_propagator_really_commutes(rng):
    # the shortcut for lambda = 0 agrees with explicit evaluation
    bath = random_bath(rng, 4, 0.0, 1.0)
    u = bathsim.joint_unitary(H_S, bath, 7.0)
    g = np.kron(numcore.gibbs(H_S, 1.0).data, numcore.gibbs(bath.H_B, 1.0).data)
    assert numcore.trace_norm(numcore.hermitize(u @ g @ u.conj().T - g)) < 1e-13


def test_correlation_bound_random_instance(rng):
    bath = random_bath(rng, 4, 0.01, 1.0)
    rep = correlation_bound_check(H_S, bath, 1.0, 10.0)
    assert rep.passed
    assert rep.lhs > 0
    assert rep.partition == pytest.approx(1.0, abs=1e-12)


def test_correlation_bound_square_root_scaling(rng):
    base = random_bath(rng, 4, 0.0, 1.5)
    scaled = []
    for lam in (1e-4, 1e-3, 1e-2):
        rep = correlation_bound_check(H_S, base.with_lambda(lam), 1.0, 10.0)
        assert rep.passed
        scaled.append(rep.lhs / math.sqrt(lam))
    const = 1.5 * math.sqrt(numcore.operator_norm(base.interaction))
    assert max(scaled) <= const


def test_correlation_bound_many_instances(rng):
    for _ in range(20):
        n = rng.integer(2, 8)
        bath = random_bath(rng, n, rng.uniform(0.0, 0.1), rng.uniform(1.0, 3.0))
        alpha = rng.choice([0.5, 1.0])
        assert correlation_bound_check(H_S, bath, alpha, rng.uniform(0.0, 20.0)).passed


def test_correlation_bound_rejects_bad_alpha(rng):
    with pytest.raises(ConstructionError):
        correlation_bound_check(H_S, random_bath(rng, 2, 0.0, 1.0), 0.0, 1.0)


# -- Davies limit probe

def _qubit_setup():
    lb = lindblad.davies_generator(lindblad.DaviesModel(H_S, 1.0, [np.array([[0, 1], [1, 0.0]])], gamma0=0.2))
    bath = ladder_bath(4, 1.0, 1.0, 0.0)
    return lb, bath


def test_probe_uncoupled_member():
    lb, bath = _qubit_setup()
    rho = np.diag([0.1, 0.9])
    out = bathsim.davies_limit_probe(H_S, [bath], lb, rho, 2.0)
    target = channels.apply(lindblad.evolve(lb, 2.0, False), rho).data
    assert out[0] == pytest.approx(numcore.trace_norm(rho - target), abs=1e-12)


def test_probe_zero_time():
    lb, bath = _qubit_setup()
    family = [bath.with_lambda(lam) for lam in (0.2, 0.1, 0.05)]
    assert not np.any(bathsim.davies_limit_probe(H_S, family, lb, np.diag([0.1, 0.9]), 0.0))


def test_probe_returns_finite_distances():
    lb, bath = _qubit_setup()
    family = [bath.with_lambda(lam) for lam in (0.4, 0.2, 0.1)]
    out = bathsim.davies_limit_probe(H_S, family, lb, np.diag([0.1, 0.9]), 1.0)
    assert out.shape == (3,)
    assert np.all(np.isfinite(out)) and np.all(out >= 0) and np.all(out <= 2.0)
