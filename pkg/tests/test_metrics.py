import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fouriershape.errors import DimensionMismatch, EmptyMask
from fouriershape.metrics import (
    confusion_counts,
    hausdorff_distance,
    scores,
    summarize_records,
    write_metrics_csv,
)


def brute_force_hausdorff(a, b):
    """O(n^2) pairwise definition, kept deliberately naive."""
    pa = np.argwhere(a)
    pb = np.argwhere(b)
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return max(d.min(axis=1).max(), d.min(axis=0).max())


# ------------------------------------------------------------------- scores


def test_confusion_counts_hand_case():
    gt = np.array([[1, 1, 0], [1, 0, 0]])
    pred = np.array([[1, 0, 1], [1, 0, 0]])
    c = confusion_counts(gt, pred)
    assert (c.tp, c.fp, c.fn, c.tn) == (2, 1, 1, 2)


def test_scores_hand_case():
    gt = np.zeros((4, 4), dtype=np.uint8)
    pred = np.zeros((4, 4), dtype=np.uint8)
    gt[0, :3] = 1
    gt[1, :2] = 1  # 5 gt pixels
    pred[0, :3] = 1
    pred[2, 0] = 1  # 3 tp, 1 fp, 2 fn
    s = scores(confusion_counts(gt, pred))
    assert s.precision == 0.75
    assert s.recall == 0.6
    assert s.iou == 0.5
    assert s.fscore == 2 * 3 / (2 * 3 + 1 + 2)


def test_scores_zero_denominators():
    empty = np.zeros((3, 3), dtype=np.uint8)
    s = scores(confusion_counts(empty, empty))
    assert s == (0.0, 0.0, 0.0, 0.0)


def test_confusion_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        confusion_counts(np.zeros((2, 2)), np.zeros((3, 3)))


def test_perfect_prediction_scores_one():
    mask = (np.random.default_rng(0).random((9, 9)) < 0.4).astype(np.uint8)
    mask[4, 4] = 1
    s = scores(confusion_counts(mask, mask))
    assert s == (1.0, 1.0, 1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_score_bounds_and_iou_fscore_order(seed):
    rng = np.random.default_rng(seed)
    gt = (rng.random((8, 8)) < 0.4).astype(np.uint8)
    pred = (rng.random((8, 8)) < 0.4).astype(np.uint8)
    s = scores(confusion_counts(gt, pred))
    assert all(0.0 <= v <= 1.0 for v in s)
    # dice dominates jaccard
    assert s.fscore >= s.iou


# ---------------------------------------------------------------- hausdorff


def test_hausdorff_identical_masks_zero():
    mask = np.zeros((8, 8), dtype=np.uint8)
    mask[2:5, 3:6] = 1
    assert hausdorff_distance(mask, mask) == 0.0


def test_hausdorff_three_four_five():
    a = np.zeros((8, 8), dtype=np.uint8)
    b = np.zeros((8, 8), dtype=np.uint8)
    a[1, 1] = 1
    b[4, 5] = 1
    assert hausdorff_distance(a, b) == 5.0


def test_hausdorff_is_symmetric_max():
    a = np.zeros((8, 8), dtype=np.uint8)
    b = np.zeros((8, 8), dtype=np.uint8)
    a[0, 0] = 1
    b[0, 0] = 1
    b[0, 4] = 1  # directed distances differ: a->b is 0, b->a is 4
    assert hausdorff_distance(a, b) == 4.0
    assert hausdorff_distance(b, a) == 4.0


def test_hausdorff_empty_raises():
    empty = np.zeros((4, 4), dtype=np.uint8)
    full = np.ones((4, 4), dtype=np.uint8)
    for gt, pred in ((empty, full), (full, empty), (empty, empty)):
        with pytest.raises(EmptyMask):
            hausdorff_distance(gt, pred)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hausdorff_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = (rng.random((12, 12)) < 0.3).astype(np.uint8)
    b = (rng.random((12, 12)) < 0.3).astype(np.uint8)
    if a.sum() == 0 or b.sum() == 0:
        return
    assert math.isclose(
        hausdorff_distance(a, b), brute_force_hausdorff(a, b), abs_tol=1e-9
    )


# --------------------------------------------------------------------- csv


def make_record(image_id, iou, hausdorff):
    return {
        "image_id": image_id,
        "precision": iou,
        "recall": iou,
        "fscore": iou,
        "iou": iou,
        "hausdorff": hausdorff,
    }


def test_summary_ignores_undefined_hausdorff():
    records = [
        make_record("a", 0.5, 2.0),
        make_record("b", 0.7, None),
        make_record("c", 0.9, 4.0),
    ]
    summary = summarize_records(records)
    assert np.isclose(summary["iou"][0], 0.7)
    assert np.isclose(summary["hausdorff"][0], 3.0)
    assert np.isclose(summary["hausdorff"][1], 1.0)
    assert summary["hausdorff_undefined"] == 1


def test_metrics_csv_layout(tmp_path):
    records = [make_record("a", 0.5, 2.0), make_record("b", 0.7, None)]
    path = tmp_path / "metrics.csv"
    write_metrics_csv(records, path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["image_id", "precision", "recall", "fscore", "iou", "hausdorff"]
    assert rows[1][0] == "a" and rows[2][0] == "b"
    assert rows[2][5] == ""  # undefined distance stays blank
    assert [r[0] for r in rows[3:]] == ["mean", "std"]
    assert float(rows[3][4]) == 0.6
    assert float(rows[3][5]) == 2.0  # mean over the defined values only
