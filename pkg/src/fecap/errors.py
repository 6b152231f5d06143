"""Exception types shared across the package."""


class FecapError(Exception):
    """Base class for all package errors."""


class DimMismatch(FecapError):
    pass


class NotHermitian(FecapError):
    pass


class NoConvergence(FecapError):
    pass


class DomainError(FecapError):
    """A spectral function was applied outside its domain."""


class InvalidDistribution(FecapError):
    pass


class DegenerateHamiltonian(FecapError):
    """Passivity is only defined here for strictly ascending energies."""


class EmptyPool(FecapError):
    pass


class EmptyDecoderList(FecapError):
    pass


class NotStochasticallyFree(FecapError):
    pass


class UnsupportedDim(FecapError):
    pass


class ParseError(FecapError):
    """Malformed problem document; message carries the document path."""


class ValidationError(FecapError):
    """Well-formed document whose contents violate a domain invariant."""
