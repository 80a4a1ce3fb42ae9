"""Seeded random ensembles of states, Hamiltonians and Davies models.

Randomness comes from :class:`SplitMix64`, a 64-bit generator with the
update ``x += 0x9E3779B97F4A7C15`` followed by the finalizer

    z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)

(all arithmetic mod 2**64).  Uniform doubles take the top 53 bits; normals
use the Box-Muller transform.  Streams are identical on every platform.
"""

import math

import numpy as np

from petzlab.bathsim import BathModel
from petzlab.lindblad import DaviesModel, davies_generator
from petzlab.numcore import DensityMatrix, HermitianOperator

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed=0):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self, low=0.0, high=1.0):
        return low + (high - low) * ((self.next_u64() >> 11) * 2.0 ** -53)

    def integer(self, low, high):
        """Uniform integer in ``[low, high]``."""
        return low + self.next_u64() % (high - low + 1)

    def normal(self, size=None):
        if size is None:
            u1 = 1.0 - self.uniform()  # (0, 1]
            u2 = self.uniform()
            return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        n = int(np.prod(size))
        return np.array([self.normal() for _ in range(n)]).reshape(size)

    def choice(self, seq):
        return seq[self.integer(0, len(seq) - 1)]


def random_hermitian(rng, d, scale=1.0):
    g = rng.normal((d, d)) + 1j * rng.normal((d, d))
    return HermitianOperator(scale * 0.5 * (g + g.conj().T))


def random_state(rng, d, mix=0.0):
    """Ginibre-distributed state, optionally mixed with ``I/d`` by weight ``mix``."""
    g = rng.normal((d, d)) + 1j * rng.normal((d, d))
    rho = g @ g.conj().T
    rho = rho / np.trace(rho).real
    rho = (1.0 - mix) * rho + mix * np.eye(d) / d
    return DensityMatrix.from_array(rho, renormalize=True)


def random_unitary(rng, d):
    g = rng.normal((d, d)) + 1j * rng.normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_davies_model(rng, d, n_couplings=2, beta_range=(0.5, 1.5), spread=2.0,
                        gamma0=1.0):
    """Davies model with a random Hamiltonian rescaled to energy spread ``spread``."""
    h = random_hermitian(rng, d).data
    w = np.linalg.eigvalsh(h)
    if w[-1] > w[0]:
        h = (h - w[0] * np.eye(d)) * (spread / (w[-1] - w[0]))
    ops = [random_hermitian(rng, d).data for _ in range(n_couplings)]
    beta = rng.uniform(*beta_range)
    return DaviesModel(HermitianOperator(h), beta, ops, gamma0=gamma0)


def random_davies(rng, d, **kwargs):
    """``(model, generator)`` pair; see :func:`random_davies_model`."""
    model = random_davies_model(rng, d, **kwargs)
    return model, davies_generator(model)


def random_bath(rng, levels, lam, beta, system_dim=2, spread=2.0):
    """Bath with a random spectrum of width ``spread`` and a random unit-norm coupling."""
    hb = random_hermitian(rng, levels).data
    w = np.linalg.eigvalsh(hb)
    if levels > 1 and w[-1] > w[0]:
        hb = (hb - w[0] * np.eye(levels)) * (spread / (w[-1] - w[0]))
    inter = random_hermitian(rng, system_dim * levels).data
    inter = inter / np.linalg.norm(inter, 2)
    return BathModel(HermitianOperator(hb), beta, HermitianOperator(inter), lam)
