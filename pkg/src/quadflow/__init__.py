"""Semigroups exp(t q^w) of complex quadratic forms with Re q <= 0.

The pipeline runs form -> singular -> spectral -> mehler -> gabor: build a
quadratic form, find its singular space and symplectic split, factorize it
to get the decay exponent, write down the Gaussian Weyl symbol of the
semigroup and evaluate Gabor matrices and their decay in closed form.
"""

from .analysis import Analysis, analyze
from .errors import QuadflowError
from .form import QuadraticForm, builtin, custom, hamilton_map, load_model
from .gabor.matrix import gabor_matrix, gabor_matrix_split
from .gabor.verify import schur_bound, verify_decay
from .mehler import mehler_symbol, prefactor_decay
from .singular import singular_space, symplectic_split
from .spectral import decay_exponent, euler_decomposition, spectrum, takagi_symplectic

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "QuadflowError",
    "QuadraticForm",
    "analyze",
    "builtin",
    "custom",
    "decay_exponent",
    "euler_decomposition",
    "gabor_matrix",
    "gabor_matrix_split",
    "hamilton_map",
    "load_model",
    "mehler_symbol",
    "prefactor_decay",
    "schur_bound",
    "singular_space",
    "spectrum",
    "symplectic_split",
    "takagi_symplectic",
    "verify_decay",
]
