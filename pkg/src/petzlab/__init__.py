"""Entropy production, detailed balance and Petz recovery for Davies semigroups.

Submodules:

* ``numcore``: Hermitian eigensolver, matrix functions, entropies.
* ``channels``: superoperators, CPTP checks, Petz and rotated-Petz maps.
* ``lindblad``: GKLS generators, Davies construction, detailed-balance checks.
* ``bounds``: entropy-production bounds, Spohn rate, fidelity bounds.
* ``bathsim``: exact dynamics with a truncated thermal bath.
* ``ensemble``: seeded random models.
"""

from petzlab._kernels import BACKEND
from petzlab.channels import Superoperator, apply, petz_recovery
from petzlab.errors import PetzlabError
from petzlab.lindblad import DaviesModel, Lindbladian, davies_generator, evolve
from petzlab.numcore import DensityMatrix, HermitianOperator, eigh, gibbs, relative_entropy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DaviesModel",
    "DensityMatrix",
    "HermitianOperator",
    "Lindbladian",
    "PetzlabError",
    "Superoperator",
    "apply",
    "davies_generator",
    "eigh",
    "evolve",
    "gibbs",
    "petz_recovery",
    "relative_entropy",
]
