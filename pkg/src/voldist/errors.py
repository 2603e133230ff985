"""Exception types shared across the package.

The CLI maps these onto exit codes: ``InvalidInput`` -> 2,
``AmbiguousSpectrum`` -> 3, ``OracleError`` -> 4.
"""


class VolDistError(Exception):
    pass


class InvalidInput(VolDistError, ValueError):
    pass


class SingularMatrixError(InvalidInput):
    def __init__(self, msg="det M = 0: Γ_M requires injective φ"):
        super().__init__(msg)


class NotAnAutomorphism(InvalidInput):
    pass


class CapExceeded(InvalidInput):
    pass


class AmbiguousSpectrum(VolDistError):
    """An eigenvalue modulus could not be separated from 1 at the allowed precision."""


class OracleError(VolDistError):
    pass


class FillingInfeasible(OracleError):
    """No filling exists inside the truncated complex."""


class BudgetExhausted(OracleError):
    """Branch-and-bound ran out of nodes before finding any integral filling."""
