import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from petzlab import channels, lindblad, numcore
from petzlab.channels import Superoperator, adjoint, apply, compose, petz_recovery, rotated_petz
from petzlab.ensemble import SplitMix64, random_davies, random_hermitian, random_state, random_unitary
from petzlab.errors import ConsistencyError, DimensionError, PreconditionError

from conftest import max_abs

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def random_channel(rng, d, env=2):
    u = random_unitary(rng, env * d)[:, :d]
    return Superoperator.from_kraus([u[i * d:(i + 1) * d, :] for i in range(env)])


def transpose_map(d):
    m = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            m[j + d * i, i + d * j] = 1.0
    return Superoperator(m)


def depolarizer(d):
    # X -> Tr[X] I/d
    return Superoperator(np.outer(channels.vec(np.eye(d) / d), channels.vec(np.eye(d)).conj()))


# -- vectorization

def test_vec_convention_matches_sandwich(rng):
    a, x, b = (random_hermitian(rng, 3).data for _ in range(3))
    assert np.allclose(channels.sandwich(a, b) @ channels.vec(x), channels.vec(a @ x @ b), atol=1e-12)


def test_superoperator_rejects_bad_shape():
    with pytest.raises(DimensionError):
        Superoperator(np.eye(3))
    with pytest.raises(DimensionError):
        Superoperator.identity(2)(np.eye(3))


# -- apply

def test_apply_identity(rng):
    rho = random_state(rng, 3)
    assert np.allclose(apply(Superoperator.identity(3), rho).data, rho.data, atol=1e-15)


def test_full_depolarizer(rng):
    out = apply(depolarizer(3), random_state(rng, 3))
    assert np.allclose(out.data, np.eye(3) / 3, atol=1e-15)


def test_qubit_davies_channel_populations():
    lb = lindblad.davies_generator(lindblad.qubit_davies_model(0.3, 1.0))
    out = apply(lindblad.evolve(lb, 1.0), np.diag([0.8, 0.2]))
    expected = lindblad.qubit_davies(0.3, 1.0, 1.0) @ np.array([0.8, 0.2])
    assert np.allclose(np.diag(out.data).real, expected, atol=1e-12)
    assert np.allclose(np.diag(out.data).real, [0.48394, 0.51606], atol=5e-6)


def test_apply_flags_trace_loss():
    shrink = Superoperator(0.5 * np.eye(4))
    with pytest.raises(ConsistencyError):
        apply(shrink, np.eye(2) / 2)


# -- adjoint and compose

def test_adjoint_of_unitary_conjugation(rng):
    u = random_unitary(rng, 3)
    s = Superoperator.conjugation(u)
    assert max_abs(adjoint(s).matrix - Superoperator.conjugation(u.conj().T).matrix) < 1e-12


def test_adjoint_of_trace_preserving_map_is_unital(rng):
    s = random_channel(rng, 3)
    assert max_abs(adjoint(s)(np.eye(3)) - np.eye(3)) < 1e-10


def test_adjoint_inner_product(rng):
    s = random_channel(rng, 2, env=3)
    for _ in range(20):
        a = rng.normal((2, 2)) + 1j * rng.normal((2, 2))
        b = rng.normal((2, 2)) + 1j * rng.normal((2, 2))
        lhs = np.trace(a.conj().T @ s(b))
        rhs = np.trace(adjoint(s)(a).conj().T @ b)
        assert abs(lhs - rhs) < 1e-10


def test_compose_with_identity(rng):
    s = random_channel(rng, 2)
    assert max_abs(compose(s, Superoperator.identity(2)).matrix - s.matrix) == 0.0
    with pytest.raises(DimensionError):
        compose(s, Superoperator.identity(3))


def test_semigroup_composition(qubit_lb):
    both = compose(lindblad.evolve(qubit_lb, 0.4), lindblad.evolve(qubit_lb, 1.1))
    assert max_abs(both.matrix - lindblad.evolve(qubit_lb, 1.5).matrix) < 1e-9


def test_petz_of_composition_same_fixed_point(rng):
    _, lb = random_davies(rng, 3)
    omega = lb.declared_fixed_point
    s1, s2 = lindblad.evolve(lb, 0.3, False), lindblad.evolve(lb, 0.9, False)
    lhs = petz_recovery(compose(s2, s1), omega)
    rhs = compose(petz_recovery(s1, omega), petz_recovery(s2, omega))
    assert max_abs(lhs.matrix - rhs.matrix) < 1e-9


# -- CPTP

def test_identity_is_cptp():
    rep = channels.is_cptp(Superoperator.identity(3))
    assert rep.passed
    assert rep.cp_residual < 1e-15 and rep.tp_residual == 0.0


def test_transpose_is_not_cp():
    rep = channels.is_cptp(transpose_map(2))
    assert not rep.passed
    assert rep.cp_residual == pytest.approx(1.0, abs=1e-12)
    assert rep.tp_residual < 1e-15


def test_choi_of_identity_is_maximally_entangled():
    c = channels.choi(Superoperator.identity(2))
    phi = np.array([1, 0, 0, 1.0])
    assert np.allclose(c, np.outer(phi, phi))


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_davies_semigroup_is_cptp(rng, t):
    _, lb = random_davies(rng, 3)
    s = channels.checked(lindblad.evolve(lb, t))
    assert s.cptp.passed


# -- fixed point

def test_fixed_point_qubit_davies(qubit_lb):
    fp = channels.fixed_point(lindblad.evolve(qubit_lb, 1.0))
    assert fp.unique
    assert np.allclose(fp.state.data, np.diag([0.3, 0.7]), atol=1e-10)


def test_fixed_point_of_generic_unitary_not_unique(rng):
    fp = channels.fixed_point(Superoperator.conjugation(random_unitary(rng, 3)))
    assert not fp.unique
    assert fp.multiplicity == 3


def test_fixed_point_of_random_davies_is_gibbs(rng):
    model, lb = random_davies(rng, 3)
    fp = channels.fixed_point(lindblad.evolve(lb, 2.0))
    gibbs = numcore.gibbs(model.H_S, model.beta).data
    assert max_abs(fp.state.data - gibbs) < 1e-8


# -- Petz

def test_petz_of_identity(rng):
    sigma = random_state(rng, 3, mix=0.1)
    p = petz_recovery(Superoperator.identity(3), sigma)
    assert max_abs(p.matrix - np.eye(9)) < 1e-12


def test_petz_of_commuting_unitary(rng):
    sigma = np.diag([0.5, 0.3, 0.2])
    u = np.diag(np.exp(1j * np.array([0.3, -1.1, 2.0])))
    p = petz_recovery(Superoperator.conjugation(u), sigma)
    assert max_abs(p.matrix - Superoperator.conjugation(u.conj().T).matrix) < 1e-12


def test_petz_of_qubit_davies_is_the_channel(qubit_lb):
    s = lindblad.evolve(qubit_lb, 1.0, include_unitary=False)
    p = petz_recovery(s, np.diag([0.3, 0.7]))
    assert max_abs(p.matrix - s.matrix) < 1e-10


def test_petz_rejects_rank_deficient_reference():
    with pytest.raises(PreconditionError, match="smallest eigenvalue"):
        petz_recovery(Superoperator.identity(2), np.diag([1.0, 0.0]))


def test_rotated_petz_at_zero(rng):
    s, sigma = random_channel(rng, 2), random_state(rng, 2, mix=0.2)
    assert max_abs(rotated_petz(s, sigma, 0.0).matrix - petz_recovery(s, sigma).matrix) == 0.0


def test_rotated_petz_maximally_mixed_reference(rng):
    # unital channel: both reference and image are I/d, so rotations are trivial
    u1, u2 = random_unitary(rng, 2), random_unitary(rng, 2)
    s = Superoperator.from_kraus([math.sqrt(0.3) * u1, math.sqrt(0.7) * u2])
    p = petz_recovery(s, np.eye(2) / 2)
    for t in (-1.5, 0.7, 3.0):
        assert max_abs(rotated_petz(s, np.eye(2) / 2, t).matrix - p.matrix) < 1e-12


def test_rotated_petz_constant_under_time_translation_symmetry(rng):
    _, lb = random_davies(rng, 3)
    omega = lb.declared_fixed_point
    s = lindblad.evolve(lb, 0.7, include_unitary=False)
    base = rotated_petz(s, omega, 0.0).matrix
    for t in (-2.0, -1.0, 1.0, 2.0):
        assert max_abs(rotated_petz(s, omega, t).matrix - base) < 1e-9


def test_rotated_petz_depends_on_t_in_general(rng):
    s, sigma = random_channel(rng, 2), random_state(rng, 2, mix=0.2)
    assert max_abs(rotated_petz(s, sigma, 1.0).matrix - rotated_petz(s, sigma, 0.0).matrix) > 1e-3


# -- recovery_check

def test_recovery_check_reference_state(rng):
    s, sigma = random_channel(rng, 2), random_state(rng, 2, mix=0.2)
    rep = channels.recovery_check(s, sigma, sigma)
    assert rep.exact
    assert max_abs(rep.recovered_rho.data - sigma.data) < 1e-10


def test_recovery_check_unitary_is_exact(rng):
    s = Superoperator.conjugation(random_unitary(rng, 3))
    rep = channels.recovery_check(s, random_state(rng, 3), random_state(rng, 3, mix=0.3))
    assert rep.exact and rep.recovery_error < 1e-9


def test_recovery_check_contractive_davies(qubit_lb):
    s = lindblad.evolve(qubit_lb, 1.0)
    rep = channels.recovery_check(s, np.diag([0.8, 0.2]), np.diag([0.3, 0.7]))
    assert rep.d_drop > 0.1
    assert not rep.exact
    assert rep.recovery_error > 0.1


# -- properties

def _instance(seed, d=None):
    rng = SplitMix64(seed)
    d = d or rng.integer(2, 3)
    return rng, random_channel(rng, d), random_state(rng, d, mix=0.1), random_state(rng, d)


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_petz_involution_on_reference(seed):
    _, s, sigma, _ = _instance(seed)
    back = petz_recovery(s, sigma)(s(sigma.data))
    assert max_abs(back - sigma.data) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_data_processing(seed):
    _, s, sigma, rho = _instance(seed)
    assert channels.recovery_check(s, rho, sigma).d_drop >= -1e-9


@settings(max_examples=25, deadline=None)
@given(seed=seeds)
def test_petz_map_is_cptp(seed):
    _, s, sigma, _ = _instance(seed)
    assert channels.is_cptp(petz_recovery(s, sigma), 1e-8).passed


@settings(max_examples=20, deadline=None)
@given(seed=seeds)
def test_petz_contravariance(seed):
    rng, s1, sigma, _ = _instance(seed, d=2)
    s2 = random_channel(rng, 2)
    lhs = petz_recovery(compose(s2, s1), sigma)
    rhs = compose(petz_recovery(s1, sigma), petz_recovery(s2, s1(sigma.data)))
    assert max_abs(lhs.matrix - rhs.matrix) < 1e-8
