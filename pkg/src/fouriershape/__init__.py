"""Contour Fourier shape descriptors and shape-weighted segmentation losses.

The pipeline: trace a mask's boundary (contour), sample its
distance-to-center profile, expand the profile into harmonic amplitudes
(fourier), and penalize amplitude gaps between prediction and ground truth
on top of cross entropy (loss). data, trainer and cli provide a synthetic
desk-scale testbed; metrics scores the results.
"""

from .contour import (
    Contour,
    RadialProfile,
    area_centroid,
    as_binary_mask,
    label_components,
    profile_from_samples,
    radial_profile,
    trace_contour,
)
from .data import DatasetSplits, ShapeSample, generate_sample, make_dataset, make_split
from .errors import (
    ArcOutOfRange,
    CentroidOnContour,
    DegenerateObject,
    DimensionMismatch,
    EmptyDataset,
    EmptyGroundTruth,
    EmptyMask,
    FourierShapeError,
    InvalidMask,
    InvalidOrder,
    InvalidParams,
    InvalidProbability,
    OrderMismatch,
    PnmError,
)
from .fourier import (
    FourierDescriptors,
    fill_polygon,
    fourier_coefficients,
    reconstruct_boundary,
    reconstruct_profile,
)
from .loss import (
    LossBreakdown,
    ObjectMatch,
    OmegaState,
    active_contour_loss,
    cross_entropy,
    fourier_loss,
    hausdorff_penalty_loss,
    match_objects,
    omega_gradient,
    shape_dissimilarity,
    update_omega,
)
from .metrics import (
    ConfusionCounts,
    Scores,
    confusion_counts,
    hausdorff_distance,
    scores,
)
from .trainer import (
    LOSS_KINDS,
    RunLog,
    TinySegNet,
    TrainConfig,
    backward,
    evaluate,
    forward,
    train,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
