"""Array-in/array-out entry points to the fouriershape kernels.

External training frameworks hand over flat row-major buffers plus explicit
(height, width) dimensions; this layer validates the plumbing, reshapes, and
delegates to the primary kernels unchanged, so every returned value is
bit-identical to what the main package computes. Calls are stateless and
safe under caller-side parallelism.

Gradients are deliberately not crossed over the boundary: callers fold the
returned scalar factor into their own differentiable cross entropy, matching
the loss module's stop-gradient treatment of the shape term.
"""

import numpy as np

from fouriershape.errors import (
    ArcOutOfRange,
    CentroidOnContour,
    DegenerateObject,
    DimensionMismatch,
    EmptyGroundTruth,
    EmptyMask,
    FourierShapeError,
    InvalidMask,
    InvalidOrder,
    InvalidParams,
    InvalidProbability,
    OrderMismatch,
)
from fouriershape.loss import describe_component, fourier_loss

__all__ = [
    "describe",
    "fourier_loss_value",
    "FourierShapeError",
    "ArcOutOfRange",
    "CentroidOnContour",
    "DegenerateObject",
    "DimensionMismatch",
    "EmptyGroundTruth",
    "EmptyMask",
    "InvalidMask",
    "InvalidOrder",
    "InvalidParams",
    "InvalidProbability",
    "OrderMismatch",
]


def _plane(buffer, height: int, width: int) -> np.ndarray:
    """Check a flat or 2-D buffer against its declared dimensions.

    bytes-like input is read as uint8; anything else goes through the array
    protocol. Value validation stays with the downstream kernels.
    """
    if height < 1 or width < 1:
        raise InvalidParams(f"dimensions must be positive, got {height}x{width}")
    if isinstance(buffer, (bytes, bytearray, memoryview)):
        arr = np.frombuffer(buffer, dtype=np.uint8)
    else:
        arr = np.asarray(buffer)
    if arr.ndim == 2:
        if arr.shape != (height, width):
            raise InvalidParams(
                f"buffer shape {arr.shape} does not match {height}x{width}"
            )
        return np.ascontiguousarray(arr)
    if arr.ndim != 1:
        raise InvalidParams(f"buffer must be flat or 2-D, got {arr.ndim}-D")
    if arr.size != height * width:
        raise InvalidParams(
            f"buffer length {arr.size} does not match {height}x{width}"
        )
    return arr.reshape(height, width)


def describe(mask, height: int, width: int, order: int) -> np.ndarray:
    """Harmonic amplitudes [Z_1 .. Z_order] of the largest object in a mask."""
    return describe_component(_plane(mask, height, width), order).amplitudes


def fourier_loss_value(pred_probs, gt_mask, height: int, width: int, omega, order: int):
    """Shape-weighted cross entropy of one probability map against one mask.

    Returns (total, ce, beta, gaps): the (1 + beta) * ce total, the plain
    cross entropy, the omega-weighted dissimilarity, and the per-harmonic
    amplitude gaps.
    """
    breakdown = fourier_loss(
        _plane(pred_probs, height, width),
        _plane(gt_mask, height, width),
        omega,
        order,
    )
    return breakdown.total, breakdown.ce, breakdown.beta, breakdown.per_harmonic_gaps
