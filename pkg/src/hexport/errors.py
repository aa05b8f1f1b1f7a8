"""Exception and warning types shared across the package."""


class HexportError(Exception):
    """Base class for all errors raised by this package."""


class MalformedHeaderError(HexportError):
    """A raster file header is missing, duplicated, or unparseable."""


class CountMismatchError(HexportError):
    """The number of data tokens does not match the declared grid size."""


class NonNumericTokenError(HexportError):
    """A data token could not be parsed as a number."""


class DuplicateKnotError(HexportError):
    """Two interpolation knots share the same abscissa."""


class EmptyKnotsError(HexportError):
    """A knot set has fewer than two knots."""


class InsufficientKnotsError(HexportError):
    """A stencil selection needs at least four knots in the neighborhood."""


class IrregularGridError(HexportError):
    """An operation requiring a uniform rectangular grid got an irregular one."""


class OutOfBoundsError(HexportError):
    """A query point lies outside the raster domain."""


class OutOfRangeError(HexportError):
    """A cell index lies outside the grid."""


class TooSparseError(HexportError):
    """Fewer than two usable rows survive NODATA removal."""


class EmptyDomainError(HexportError):
    """A domain to tessellate has zero or negative extent."""


class ConstraintInfeasibleError(HexportError):
    """Degradation parameters cannot satisfy the gap constraints."""


class GeometryMismatchError(HexportError):
    """Two rasters expected to share geometry do not."""


class NonFiniteStateError(HexportError):
    """A simulation state picked up a NaN or infinity."""


class EmptyOverlapError(HexportError):
    """Two rasters to compare have no overlapping samples."""


class DegenerateRangeWarning(UserWarning):
    """All values equal and no explicit range: rendering a single color."""


class SparseDataWarning(UserWarning):
    """Rows with fewer than two knots were dropped while building a grid."""
