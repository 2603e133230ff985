"""Volume distortion of Z^m inside abelian-by-cyclic groups Gamma_M."""

__version__ = "0.1.0"

from .errors import AmbiguousSpectrum, InvalidInput, OracleError, VolDistError  # noqa: E402
from .intmat import IntMatrix, IntPolynomial  # noqa: E402

__all__ = ["__version__", "AmbiguousSpectrum", "InvalidInput", "IntMatrix", "IntPolynomial", "OracleError", "VolDistError"]
