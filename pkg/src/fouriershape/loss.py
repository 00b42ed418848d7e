"""Shape-aware segmentation losses built on harmonic amplitude gaps.

The headline loss scales a pixel-sum cross entropy by (1 + beta), where
beta is a weighted sum of per-harmonic amplitude gaps between the ground
truth object and its matched prediction. The weights can be adapted during
training from the gradient of the loss with respect to each weight, which
is simply cross entropy times the corresponding gap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .contour import (
    area_centroid,
    as_binary_mask,
    label_components,
    radial_profile,
    ranked_components,
    trace_contour,
)
from .errors import (
    CentroidOnContour,
    DegenerateObject,
    DimensionMismatch,
    EmptyGroundTruth,
    EmptyMask,
    InvalidOrder,
    InvalidParams,
    InvalidProbability,
    OrderMismatch,
)
from .fourier import FourierDescriptors, fourier_coefficients

PROB_CLAMP = 1e-7

MATCH_MODES = ("largest", "iou-threshold")


def as_probability_map(probs) -> np.ndarray:
    """Validate a probability map: 2-D float values in [0, 1]."""
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidProbability(f"probability map must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all() or float(arr.min()) < 0.0 or float(arr.max()) > 1.0:
        raise InvalidProbability("probabilities must be finite and within [0, 1]")
    return arr


def cross_entropy(pred_probs, gt_mask) -> float:
    """Pixel-sum binary cross entropy with probabilities clamped to
    [1e-7, 1 - 1e-7] before the logs."""
    probs = as_probability_map(pred_probs)
    gt = as_binary_mask(gt_mask)
    if probs.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {probs.shape} vs {gt.shape}")
    clamped = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    target = gt.astype(np.float64)
    value = -(target * np.log(clamped) + (1.0 - target) * np.log1p(-clamped))
    return float(value.sum())


@dataclass(frozen=True)
class ObjectMatch:
    """Pairing of a ground-truth component with a predicted component.

    pred_component is None when no prediction was matched; iou is the
    overlap of the paired components (0.0 for unmatched).
    """

    gt_component: int
    pred_component: int | None
    iou: float


@dataclass
class OmegaState:
    """Per-harmonic loss weights with their update step size.

    history records one entry per update: the weights after the step and the
    gradient that produced it.
    """

    omegas: np.ndarray
    learning_rate: float
    history: list = field(default_factory=list)

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=np.float64).copy()
        if self.omegas.ndim != 1 or self.omegas.size < 1:
            raise InvalidParams("omegas must be a nonempty 1-D vector")
        if (self.omegas < 0.0).any():
            raise InvalidParams("omegas must be nonnegative")
        if self.learning_rate < 0.0:
            raise InvalidParams("learning_rate must be nonnegative")

    @property
    def order(self) -> int:
        return int(self.omegas.size)


@dataclass(frozen=True)
class LossBreakdown:
    """One loss evaluation: total == (1 + beta) * ce and
    beta == omegas . per_harmonic_gaps."""

    ce: float
    beta: float
    total: float
    per_harmonic_gaps: np.ndarray
    omegas: np.ndarray

    def as_dict(self) -> dict:
        return {
            "ce": self.ce,
            "beta": self.beta,
            "total": self.total,
            "gaps": [float(v) for v in self.per_harmonic_gaps],
            "omegas": [float(v) for v in self.omegas],
        }


def _omega_vector(omega) -> np.ndarray:
    if isinstance(omega, OmegaState):
        return omega.omegas
    arr = np.asarray(omega, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidParams("omega must be a 1-D vector or an OmegaState")
    return arr


def _intersection_counts(gt_labels, pred_labels, gt_count, pred_count) -> np.ndarray:
    """Joint histogram of component labels, shape (gt_count+1, pred_count+1)."""
    joint = gt_labels.astype(np.int64) * (pred_count + 1) + pred_labels
    counts = np.bincount(joint.ravel(), minlength=(gt_count + 1) * (pred_count + 1))
    return counts.reshape(gt_count + 1, pred_count + 1)


def match_objects(gt_mask, pred_mask, mode: str = "largest") -> list[ObjectMatch]:
    """Pair ground-truth components with predicted components.

    'largest' pairs the largest ground-truth component with the largest
    predicted component (or None when the prediction is empty). In
    'iou-threshold' every ground-truth component keeps its best-overlap
    prediction, and only pairs with IoU above 0.5 survive. Area ties pick
    the component whose first pixel comes earlier in scan order.
    """
    matches, _, _ = _match_with_labels(gt_mask, pred_mask, mode)
    return matches


def _match_with_labels(gt_mask, pred_mask, mode: str):
    gt = as_binary_mask(gt_mask)
    pred = as_binary_mask(pred_mask)
    if gt.shape != pred.shape:
        raise DimensionMismatch(f"shapes differ: {gt.shape} vs {pred.shape}")
    if mode not in MATCH_MODES:
        raise ValueError(f"unknown match mode {mode!r}")

    gt_labels, gt_count = label_components(gt)
    if gt_count == 0:
        raise EmptyGroundTruth("ground truth has no foreground component")
    pred_labels, pred_count = label_components(pred)

    gt_ranked = ranked_components(gt_labels, gt_count)
    counts = _intersection_counts(gt_labels, pred_labels, gt_count, pred_count)
    gt_areas = counts.sum(axis=1)
    pred_areas = counts.sum(axis=0)

    def pair_iou(gi: int, pj: int) -> float:
        inter = counts[gi, pj]
        union = gt_areas[gi] + pred_areas[pj] - inter
        return float(inter / union) if union > 0 else 0.0

    if mode == "largest":
        gi = gt_ranked[0]
        if pred_count == 0:
            return [ObjectMatch(gi, None, 0.0)], gt_labels, pred_labels
        pj = ranked_components(pred_labels, pred_count)[0]
        return [ObjectMatch(gi, pj, pair_iou(gi, pj))], gt_labels, pred_labels

    matches = []
    for gi in gt_ranked:
        best_j = None
        best_iou = 0.0
        for pj in range(1, pred_count + 1):
            value = pair_iou(gi, pj)
            if value > best_iou:
                best_j, best_iou = pj, value
        if best_j is not None and best_iou > 0.5:
            matches.append(ObjectMatch(gi, best_j, best_iou))
    return matches, gt_labels, pred_labels


def describe_component(component_mask, order: int) -> FourierDescriptors:
    """Trace one isolated component and expand its radial profile."""
    contour = trace_contour(component_mask, "largest")
    centroid = area_centroid(component_mask)
    profile = radial_profile(contour, centroid)
    return fourier_coefficients(profile, order)


def shape_dissimilarity(
    gt_desc: FourierDescriptors,
    pred_desc: FourierDescriptors | None,
    omega,
) -> tuple[float, np.ndarray]:
    """Weighted sum of per-harmonic amplitude gaps.

    A missing prediction contributes zero amplitudes, so the gaps fall back
    to the ground-truth amplitudes themselves. Returns (beta, gaps).
    """
    weights = _omega_vector(omega)
    if gt_desc.order != weights.size:
        raise OrderMismatch(
            f"descriptor order {gt_desc.order} vs {weights.size} weights"
        )
    if pred_desc is None:
        pred_amp = np.zeros(gt_desc.order)
    else:
        if pred_desc.order != gt_desc.order:
            raise OrderMismatch(
                f"prediction order {pred_desc.order} vs ground truth {gt_desc.order}"
            )
        pred_amp = pred_desc.amplitudes
    gaps = np.abs(gt_desc.amplitudes - pred_amp)
    return float(weights @ gaps), gaps


def fourier_loss(
    pred_probs,
    gt_mask,
    omega,
    order: int,
    mode: str = "largest",
) -> LossBreakdown:
    """Cross entropy scaled by (1 + beta) with beta from amplitude gaps.

    Predictions are thresholded at probability strictly above 0.5 before
    matching. Matched predicted components that are too small to trace, too
    thin to measure radii on, or too short to expand at the requested order
    count as missing, which leaves the full ground-truth amplitude as the
    gap. Gaps from multiple matches add up.
    """
    weights = _omega_vector(omega)
    if weights.size != order:
        raise OrderMismatch(f"{weights.size} weights for order {order}")
    probs = as_probability_map(pred_probs)
    gt = as_binary_mask(gt_mask)
    if probs.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {probs.shape} vs {gt.shape}")

    ce = cross_entropy(probs, gt)
    hard = (probs > 0.5).astype(np.uint8)
    matches, gt_labels, pred_labels = _match_with_labels(gt, hard, mode)

    gaps_total = np.zeros(order)
    for match in matches:
        gt_desc = describe_component(gt_labels == match.gt_component, order)
        pred_desc = None
        if match.pred_component is not None:
            try:
                pred_desc = describe_component(
                    pred_labels == match.pred_component, order
                )
            except (DegenerateObject, InvalidOrder, CentroidOnContour):
                pred_desc = None
        _, gaps = shape_dissimilarity(gt_desc, pred_desc, weights)
        gaps_total += gaps

    beta = float(weights @ gaps_total)
    total = (1.0 + beta) * ce
    return LossBreakdown(
        ce=ce,
        beta=beta,
        total=total,
        per_harmonic_gaps=gaps_total,
        omegas=weights.copy(),
    )


def omega_gradient(ce: float, gaps) -> np.ndarray:
    """Gradient of the scaled loss with respect to each weight: ce * gap_n."""
    gaps = np.asarray(gaps, dtype=np.float64)
    return ce * gaps


def update_omega(state: OmegaState, gradients) -> OmegaState:
    """Ascend the weights by learning_rate * gradient, clamped at zero.

    Mutates and returns the same state; the step is recorded in history.
    """
    grad = np.asarray(gradients, dtype=np.float64)
    if grad.shape != state.omegas.shape:
        raise OrderMismatch(f"{grad.size} gradients for {state.omegas.size} weights")
    state.omegas = np.maximum(state.omegas + state.learning_rate * grad, 0.0)
    state.history.append(
        {"omegas": state.omegas.tolist(), "gradients": grad.tolist()}
    )
    return state


def hausdorff_penalty_loss(pred_probs, gt_mask, alpha: float = 0.2) -> float:
    """Squared-error loss weighted by distance to the ground-truth boundary.

    Every pixel contributes (p - g)^2 * d^alpha where d is the Euclidean
    distance to the nearest ground-truth foreground boundary pixel
    (following Karimi and Salcudean 2019). Boundary pixels are foreground
    pixels with a 4-neighbour background pixel or an image edge.
    """
    if alpha <= 0.0:
        raise InvalidParams(f"alpha must be positive, got {alpha}")
    probs = as_probability_map(pred_probs)
    gt = as_binary_mask(gt_mask)
    if probs.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {probs.shape} vs {gt.shape}")
    weight = _boundary_distance_weight(gt, alpha)
    diff = probs - gt.astype(np.float64)
    return float((diff * diff * weight).sum())


def _boundary_distance_weight(gt: np.ndarray, alpha: float) -> np.ndarray:
    fg = gt.astype(bool)
    if not fg.any():
        raise EmptyMask("ground truth has no foreground; boundary is undefined")
    eroded = ndimage.binary_erosion(fg, border_value=0)
    boundary = fg & ~eroded
    distance = ndimage.distance_transform_edt(~boundary)
    return distance**alpha


def active_contour_loss(pred_probs, gt_mask, lam: float = 1.0) -> float:
    """Geodesic active contour loss of Chen et al. 2019.

    Sum of the prediction's gradient magnitude (length term, eps 1e-8) plus
    lam times the region terms |sum u (v-1)^2| + |sum (1-u) v^2| with the
    ground truth as the target region.
    """
    probs = as_probability_map(pred_probs)
    gt = as_binary_mask(gt_mask)
    if probs.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {probs.shape} vs {gt.shape}")
    target = gt.astype(np.float64)
    grad_row = np.zeros_like(probs)
    grad_col = np.zeros_like(probs)
    grad_row[:-1, :] = probs[1:, :] - probs[:-1, :]
    grad_col[:, :-1] = probs[:, 1:] - probs[:, :-1]
    length = float(np.sqrt(grad_row**2 + grad_col**2 + 1e-8).sum())
    region_in = abs(float((probs * (target - 1.0) ** 2).sum()))
    region_out = abs(float(((1.0 - probs) * target**2).sum()))
    return length + lam * (region_in + region_out)
