"""Synthetic star-convex segmentation samples and deterministic splits.

Each sample is a single smooth blob whose radius varies with angle as
r(theta) = r0 * (1 + sum_k c_k cos(k theta + phi_k)), rasterized onto a
low-contrast noisy background. The perturbation budget sum |c_k| stays
below 0.45 so the radius never collapses and the blob stays star shaped
about its center.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .contour import label_components, trace_contour
from .errors import DegenerateObject, EmptyDataset, InvalidParams
from . import pnm

_MIN_FOREGROUND = 50
_MAX_ATTEMPTS = 32
_RADIUS_FRACTION = (0.26, 0.32)
_ROUGHNESS_RANGE = (0.12, 0.42)
_CENTER_JITTER = 3.0


@dataclass(frozen=True)
class ShapeSample:
    """One synthetic image with its ground-truth mask."""

    image: np.ndarray
    mask: np.ndarray
    seed: int
    params: dict


@dataclass(frozen=True)
class SplitIds:
    train: list[int]
    val: list[int]
    test: list[int]


@dataclass(frozen=True)
class DatasetSplits:
    train: list[ShapeSample]
    val: list[ShapeSample]
    test: list[ShapeSample]
    seed: int
    params: dict = field(default_factory=dict)


def generate_sample(
    seed: int,
    width: int = 96,
    height: int = 96,
    contrast: float = 0.05,
    noise_sigma: float = 0.1,
    harmonics: int = 4,
) -> ShapeSample:
    """Generate one image/mask pair; the same seed gives identical bits.

    The image is background 0.5 plus contrast on the foreground plus
    Gaussian noise, clipped to [0, 1]. Masks are regenerated from the same
    random stream until they have a single traceable component with at
    least 50 foreground pixels.
    """
    if width < 64 or height < 64:
        raise InvalidParams(f"grid must be at least 64x64, got {width}x{height}")
    if not 0.0 < contrast <= 0.5:
        raise InvalidParams(f"contrast must be in (0, 0.5], got {contrast}")
    if noise_sigma < 0.0:
        raise InvalidParams(f"noise_sigma must be nonnegative, got {noise_sigma}")
    if harmonics < 0:
        raise InvalidParams(f"harmonics must be nonnegative, got {harmonics}")
    if seed < 0:
        raise InvalidParams(f"seed must be nonnegative, got {seed}")

    rng = np.random.default_rng(seed)
    rows = np.arange(height, dtype=np.float64)[:, None]
    cols = np.arange(width, dtype=np.float64)[None, :]

    for attempt in range(1, _MAX_ATTEMPTS + 1):
        base_radius = rng.uniform(*_RADIUS_FRACTION) * min(width, height)
        center = (
            height / 2.0 + rng.uniform(-_CENTER_JITTER, _CENTER_JITTER),
            width / 2.0 + rng.uniform(-_CENTER_JITTER, _CENTER_JITTER),
        )
        if harmonics > 0:
            # low harmonics carry more energy, like natural organ outlines
            raw = rng.uniform(0.5, 1.0, harmonics) / np.arange(1, harmonics + 1)
            raw *= rng.choice((-1.0, 1.0), harmonics)
            coeffs = raw * (rng.uniform(*_ROUGHNESS_RANGE) / np.abs(raw).sum())
            phases = rng.uniform(0.0, 2.0 * np.pi, harmonics)
        else:
            coeffs = np.zeros(0)
            phases = np.zeros(0)

        dy = rows - center[0]
        dx = cols - center[1]
        theta = np.arctan2(dy, dx)
        radius = np.full(theta.shape, base_radius)
        for k in range(harmonics):
            radius += base_radius * coeffs[k] * np.cos((k + 1) * theta + phases[k])
        mask = (np.hypot(dy, dx) <= radius).astype(np.uint8)

        noise = rng.normal(0.0, noise_sigma, (height, width)) if noise_sigma > 0 else 0.0
        if int(mask.sum()) < _MIN_FOREGROUND:
            continue
        _, component_count = label_components(mask)
        if component_count != 1:
            continue
        try:
            trace_contour(mask, "largest")
        except DegenerateObject:
            continue
        image = np.clip(0.5 + contrast * mask + noise, 0.0, 1.0)
        params = {
            "width": width,
            "height": height,
            "contrast": contrast,
            "noise_sigma": noise_sigma,
            "harmonics": harmonics,
            "base_radius": float(base_radius),
            "center": [float(center[0]), float(center[1])],
            "coeffs": [float(c) for c in coeffs],
            "phases": [float(p) for p in phases],
            "attempt": attempt,
        }
        return ShapeSample(image=image, mask=mask, seed=seed, params=params)

    raise InvalidParams(
        f"no valid mask after {_MAX_ATTEMPTS} attempts with seed {seed}"
    )


def make_split(seed: int, counts: tuple[int, int, int] = (200, 50, 100)) -> SplitIds:
    """Partition ids 0 .. sum(counts)-1 into disjoint shuffled splits."""
    if any(c < 0 for c in counts) or sum(counts) < 1:
        raise InvalidParams(f"counts must be nonnegative and sum above 0: {counts}")
    total = sum(counts)
    order = np.random.default_rng(seed).permutation(total)
    train = [int(i) for i in order[: counts[0]]]
    val = [int(i) for i in order[counts[0] : counts[0] + counts[1]]]
    test = [int(i) for i in order[counts[0] + counts[1] :]]
    return SplitIds(train, val, test)


def sample_seed(dataset_seed: int, sample_id: int) -> int:
    """Stable per-sample seed derived from the dataset seed."""
    state = np.random.SeedSequence([dataset_seed, sample_id]).generate_state(1)[0]
    return int(state)


def make_dataset(
    seed: int,
    counts: tuple[int, int, int] = (200, 50, 100),
    **sample_params,
) -> DatasetSplits:
    """Generate the three splits of a synthetic dataset."""
    ids = make_split(seed, counts)

    def build(id_list):
        return [
            generate_sample(sample_seed(seed, i), **sample_params) for i in id_list
        ]

    return DatasetSplits(
        train=build(ids.train),
        val=build(ids.val),
        test=build(ids.test),
        seed=seed,
        params=dict(sample_params),
    )


def save_dataset(dirpath, splits: DatasetSplits) -> None:
    """Persist a dataset as PGM images, PBM masks and a JSON manifest."""
    os.makedirs(dirpath, exist_ok=True)
    manifest = {"seed": splits.seed, "params": splits.params, "splits": {}}
    index = 0
    for name in ("train", "val", "test"):
        entries = []
        for sample in getattr(splits, name):
            stem = f"{index:05d}"
            pnm.write_pgm(os.path.join(dirpath, f"{stem}_img.pgm"), sample.image)
            pnm.write_pbm(os.path.join(dirpath, f"{stem}_mask.pbm"), sample.mask)
            entries.append({"stem": stem, "seed": sample.seed, "params": sample.params})
            index += 1
        manifest["splits"][name] = entries
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_dataset(dirpath) -> DatasetSplits:
    """Load a dataset previously written by save_dataset."""
    with open(os.path.join(dirpath, "manifest.json")) as fh:
        manifest = json.load(fh)
    splits = {}
    for name in ("train", "val", "test"):
        samples = []
        for entry in manifest["splits"].get(name, []):
            image = pnm.read_image(os.path.join(dirpath, f"{entry['stem']}_img.pgm"))
            mask = pnm.read_mask(os.path.join(dirpath, f"{entry['stem']}_mask.pbm"))
            samples.append(
                ShapeSample(
                    image=image, mask=mask, seed=entry["seed"], params=entry["params"]
                )
            )
        splits[name] = samples
    if not any(splits.values()):
        raise EmptyDataset(f"{dirpath} holds no samples")
    return DatasetSplits(
        train=splits["train"],
        val=splits["val"],
        test=splits["test"],
        seed=manifest["seed"],
        params=manifest.get("params", {}),
    )
