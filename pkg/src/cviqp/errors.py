"""Exception types shared across the package.

Validation failures are precondition violations (bad parameters, grids that
cannot resolve the requested state); numerical failures happen inside an
otherwise valid computation (for instance conditioning on a bin that carries
no probability mass).
"""


class ValidationError(ValueError):
    """A precondition on inputs or parameters was violated."""


class RepresentationError(ValidationError):
    """A state was supplied in the wrong quadrature representation."""


class GridMismatchError(ValidationError):
    """Two states that must share a grid do not."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (not bad inputs)."""


class ZeroMassBinError(NumericalError):
    """Conditioning was requested on a measurement bin with no mass."""
