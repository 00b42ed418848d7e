"""Exception types shared across the package."""


class FourierShapeError(Exception):
    """Base class for every domain error raised by this package."""


class EmptyMask(FourierShapeError):
    """A mask that must contain foreground pixels has none."""


class DegenerateObject(FourierShapeError):
    """A component is too small to carry a closed boundary (fewer than 4 distinct pixels)."""


class CentroidOnContour(FourierShapeError):
    """The centroid coincides with a contour point, so radial distances are undefined."""


class InvalidOrder(FourierShapeError):
    """Requested harmonic order is below 1 or beyond the aliasing guard of half the sample count."""


class ArcOutOfRange(FourierShapeError):
    """An arc-length sample lies outside [0, total_length]."""


class DimensionMismatch(FourierShapeError):
    """Two grids that must share a shape do not."""


class EmptyGroundTruth(FourierShapeError):
    """Ground-truth mask has no foreground component."""


class OrderMismatch(FourierShapeError):
    """Descriptor order and weight-vector length disagree."""


class EmptyDataset(FourierShapeError):
    """A dataset split that must be nonempty is empty."""


class InvalidParams(FourierShapeError):
    """Generation or loss parameters outside their documented ranges."""


class InvalidMask(FourierShapeError):
    """Mask values are not exactly 0 or 1, or the array is not 2-D."""


class InvalidProbability(FourierShapeError):
    """Probability-map values fall outside [0, 1], or the array is not 2-D."""


class PnmError(FourierShapeError):
    """Malformed or unsupported file payload (PGM, PBM, or descriptor CSV)."""
