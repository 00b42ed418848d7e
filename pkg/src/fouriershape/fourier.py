"""Fourier descriptors of radial contour profiles.

The increment-form coefficients

    a_n = (1/(pi n)) * sum_t (xi[t-1] - xi[t]) * sin(2 pi n l_t / L)
    b_n = -(1/(pi n)) * sum_t (xi[t-1] - xi[t]) * cos(2 pi n l_t / L)

are the exact series coefficients of the piecewise-constant profile that
takes value xi[t] on the arc interval [l_t, l_{t+1}). The amplitudes
Z_n = sqrt(a_n^2 + b_n^2) are invariant to the traversal start point and to
rigid motions of the underlying mask.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .contour import Contour, RadialProfile
from .errors import ArcOutOfRange, InvalidOrder, PnmError

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierDescriptors:
    """Truncated harmonic expansion of a radial profile.

    coeffs[n-1] holds (a_n, b_n) for harmonic n; amplitudes[n-1] is Z_n.
    a0 is the arc-weighted mean radius (the constant series term).
    """

    order: int
    a0: float
    coeffs: np.ndarray
    amplitudes: np.ndarray
    total_length: float


def fourier_coefficients(profile: RadialProfile, order: int) -> FourierDescriptors:
    """Expand a radial profile into its first `order` harmonics."""
    samples = profile.xi.size
    if order < 1:
        raise InvalidOrder(f"order must be at least 1, got {order}")
    if samples < 4:
        raise InvalidOrder(f"profile has {samples} samples, need at least 4")
    if 2 * order > samples:
        raise InvalidOrder(f"order {order} aliases on {samples} samples")

    harmonics = np.arange(1, order + 1, dtype=np.float64)
    phase = np.outer(harmonics, profile.arc_lengths) * (_TWO_PI / profile.total_length)
    scale = 1.0 / (np.pi * harmonics)
    a = scale * (np.sin(phase) @ profile.deltas)
    b = -scale * (np.cos(phase) @ profile.deltas)
    return FourierDescriptors(
        order=order,
        a0=profile.mean_radius,
        coeffs=np.column_stack([a, b]),
        amplitudes=np.hypot(a, b),
        total_length=profile.total_length,
    )


def reconstruct_profile(desc: FourierDescriptors, sample_arcs) -> np.ndarray:
    """Evaluate the truncated series at the given arc positions in [0, L]."""
    arcs = np.atleast_1d(np.asarray(sample_arcs, dtype=np.float64))
    if (arcs < 0.0).any() or (arcs > desc.total_length).any():
        raise ArcOutOfRange(
            f"arc samples must lie in [0, {desc.total_length}]"
        )
    harmonics = np.arange(1, desc.order + 1, dtype=np.float64)
    phase = np.outer(arcs, harmonics) * (_TWO_PI / desc.total_length)
    values = desc.a0 + np.cos(phase) @ desc.coeffs[:, 0] + np.sin(phase) @ desc.coeffs[:, 1]
    return values


def reconstruct_boundary(
    contour: Contour, desc: FourierDescriptors, centroid: tuple[float, float]
) -> np.ndarray:
    """Place the reconstructed radii back along the original ray directions.

    Point t is centroid + xi_N(l_t) * u_t where u_t is the unit vector from
    the centroid to the original contour point. Returns float (T, 2) points.
    """
    center = np.asarray(centroid, dtype=np.float64)
    diff = contour.points.astype(np.float64) - center
    radii = np.hypot(diff[:, 0], diff[:, 1])
    units = diff / radii[:, None]
    values = reconstruct_profile(desc, contour.arc_lengths)
    return center + values[:, None] * units


def fill_polygon(points: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Rasterize a closed polygon to a mask by even-odd scanline filling.

    Pixel centers sit at integer coordinates. Boundary vertices are stamped
    into the result so the filled region always contains the outline.
    """
    pts = np.asarray(points, dtype=np.float64)
    out = np.zeros(shape, dtype=np.uint8)
    y1 = pts[:, 0]
    x1 = pts[:, 1]
    y2 = np.roll(y1, -1)
    x2 = np.roll(x1, -1)
    slanted = y1 != y2
    for row in range(shape[0]):
        # half-open span rule avoids double counting at shared vertices
        hits = slanted & (
            ((y1 <= row) & (row < y2)) | ((y2 <= row) & (row < y1))
        )
        if not hits.any():
            continue
        t = (row - y1[hits]) / (y2[hits] - y1[hits])
        crossings = np.sort(x1[hits] + t * (x2[hits] - x1[hits]))
        for left, right in crossings.reshape(-1, 2):
            lo = max(int(np.ceil(left)), 0)
            hi = min(int(np.floor(right)), shape[1] - 1)
            if hi >= lo:
                out[row, lo : hi + 1] = 1

    stamp = np.rint(pts).astype(int)
    inside = (
        (stamp[:, 0] >= 0)
        & (stamp[:, 0] < shape[0])
        & (stamp[:, 1] >= 0)
        & (stamp[:, 1] < shape[1])
    )
    out[stamp[inside, 0], stamp[inside, 1]] = 1
    return out


def write_descriptors_csv(desc: FourierDescriptors, path) -> None:
    """Write one descriptor set: a header carrying a0 and L, then one row
    n,a_n,b_n,Z_n per harmonic."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a0", repr(desc.a0), "L", repr(desc.total_length)])
        writer.writerow(["n", "a_n", "b_n", "Z_n"])
        for n in range(1, desc.order + 1):
            writer.writerow(
                [
                    n,
                    repr(float(desc.coeffs[n - 1, 0])),
                    repr(float(desc.coeffs[n - 1, 1])),
                    repr(float(desc.amplitudes[n - 1])),
                ]
            )


def read_descriptors_csv(path) -> FourierDescriptors:
    """Read a descriptor CSV produced by write_descriptors_csv."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or rows[0][0] != "a0" or rows[0][2] != "L":
        raise PnmError(f"{path}: not a descriptor CSV")
    a0 = float(rows[0][1])
    total_length = float(rows[0][3])
    data = np.array([[float(v) for v in row[1:4]] for row in rows[2:]])
    return FourierDescriptors(
        order=len(data),
        a0=a0,
        coeffs=data[:, :2].copy(),
        amplitudes=data[:, 2].copy(),
        total_length=total_length,
    )
