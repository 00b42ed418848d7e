"""Segmentation quality metrics on binary masks."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .contour import as_binary_mask
from .errors import DimensionMismatch, EmptyMask


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class Scores(NamedTuple):
    precision: float
    recall: float
    iou: float
    fscore: float


def confusion_counts(gt, pred) -> ConfusionCounts:
    """Pixel confusion counts between two masks of equal shape."""
    g = as_binary_mask(gt)
    p = as_binary_mask(pred)
    if g.shape != p.shape:
        raise DimensionMismatch(f"shapes differ: {g.shape} vs {p.shape}")
    tp = int(np.count_nonzero(g & p))
    fp = int(np.count_nonzero(~g.astype(bool) & p.astype(bool)))
    fn = int(np.count_nonzero(g.astype(bool) & ~p.astype(bool)))
    tn = g.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def scores(counts: ConfusionCounts) -> Scores:
    """Precision, recall, IoU and F-score; empty ratios (0/0) score 0."""

    def ratio(num: int, den: int) -> float:
        return num / den if den > 0 else 0.0

    precision = ratio(counts.tp, counts.tp + counts.fp)
    recall = ratio(counts.tp, counts.tp + counts.fn)
    iou = ratio(counts.tp, counts.tp + counts.fp + counts.fn)
    fscore = ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn)
    return Scores(precision, recall, iou, fscore)


def hausdorff_distance(gt, pred) -> float:
    """Symmetric Hausdorff distance between the foreground pixel sets.

    Computed with exact Euclidean distance transforms; undefined (raises
    EmptyMask) when either mask is empty.
    """
    g = as_binary_mask(gt).astype(bool)
    p = as_binary_mask(pred).astype(bool)
    if g.shape != p.shape:
        raise DimensionMismatch(f"shapes differ: {g.shape} vs {p.shape}")
    if not g.any() or not p.any():
        raise EmptyMask("Hausdorff distance needs foreground on both sides")
    to_pred = ndimage.distance_transform_edt(~p)
    to_gt = ndimage.distance_transform_edt(~g)
    return float(max(to_pred[g].max(), to_gt[p].max()))


def write_metrics_csv(records: list[dict], path) -> None:
    """Write per-image metric rows plus mean and std summary rows.

    Each record needs image_id, precision, recall, fscore, iou and hausdorff;
    a hausdorff of None (undefined for that image) becomes an empty cell and
    is excluded from the summary.
    """
    fields = ["precision", "recall", "fscore", "iou", "hausdorff"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image_id"] + fields)
        for rec in records:
            row = [rec["image_id"]]
            for name in fields:
                value = rec[name]
                row.append("" if value is None else repr(float(value)))
            writer.writerow(row)
        for label, agg in (("mean", np.mean), ("std", np.std)):
            row = [label]
            for name in fields:
                values = [rec[name] for rec in records if rec[name] is not None]
                row.append(repr(float(agg(values))) if values else "")
            writer.writerow(row)


def summarize_records(records: list[dict]) -> dict:
    """Mean and std per metric over a list of per-image records; hausdorff
    aggregates only the defined values and reports how many were undefined."""
    out = {}
    for name in ("precision", "recall", "fscore", "iou", "hausdorff"):
        values = [rec[name] for rec in records if rec[name] is not None]
        if values:
            out[name] = (float(np.mean(values)), float(np.std(values)))
        else:
            out[name] = (float("nan"), float("nan"))
    out["hausdorff_undefined"] = sum(1 for rec in records if rec["hausdorff"] is None)
    return out
