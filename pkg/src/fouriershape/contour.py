"""Binary-mask contour extraction and distance-to-center profiles.

Masks are 2-D arrays with values in {0, 1}; foreground components are
8-connected. Contours are closed Moore-neighbor cycles traced clockwise in
image coordinates (row grows downward) from the topmost-then-leftmost
boundary pixel of the component.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import (
    CentroidOnContour,
    DegenerateObject,
    EmptyMask,
    InvalidMask,
    InvalidParams,
)

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)

# Moore neighbourhood in clockwise order, starting at the west neighbour.
_OFFSETS = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_OFFSET_INDEX = {off: i for i, off in enumerate(_OFFSETS)}


def as_binary_mask(mask) -> np.ndarray:
    """Validate a mask and return it as a uint8 array with values in {0, 1}."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise InvalidMask(f"mask must be 2-D, got shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise InvalidMask("mask values must be exactly 0 or 1")
    return arr.astype(np.uint8, copy=False)


@dataclass(frozen=True)
class Contour:
    """Closed pixel cycle with cumulative arc lengths.

    points: (T, 2) integer (row, col) positions, no consecutive repeats.
    arc_lengths: (T,) cumulative chord lengths, arc_lengths[0] == 0.
    total_length: perimeter including the chord closing the cycle.
    """

    points: np.ndarray
    arc_lengths: np.ndarray
    total_length: float

    def __len__(self) -> int:
        return len(self.points)

    @property
    def start_point(self) -> tuple[int, int]:
        return int(self.points[0, 0]), int(self.points[0, 1])

    @property
    def segment_lengths(self) -> np.ndarray:
        """Length of the arc step after each point; the last closes the cycle."""
        return np.diff(self.arc_lengths, append=self.total_length)


@dataclass(frozen=True)
class RadialProfile:
    """Distance-to-center samples of a contour, with their arc positions.

    xi[t] is the Euclidean distance from the centroid to contour point t;
    deltas[t] = xi[t-1] - xi[t] with the wrap-around difference stored at
    index 0. mean_radius is the arc-weighted mean of xi, each sample owning
    the arc segment that starts at it.
    """

    centroid: tuple[float, float]
    xi: np.ndarray
    deltas: np.ndarray
    arc_lengths: np.ndarray
    total_length: float
    mean_radius: float

    def __len__(self) -> int:
        return len(self.xi)

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.arc_lengths, append=self.total_length)


def label_components(mask) -> tuple[np.ndarray, int]:
    """Label 8-connected foreground components; ids start at 1."""
    m = as_binary_mask(mask)
    labels, count = ndimage.label(m, structure=_EIGHT_CONNECTED)
    return labels, int(count)


def ranked_components(labels: np.ndarray, count: int) -> list[int]:
    """Component ids ordered by descending area; ties go to the lower id,
    which is the component whose first pixel comes earlier in scan order."""
    areas = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    return sorted(range(1, count + 1), key=lambda lab: (-int(areas[lab - 1]), lab))


def trace_contour(mask, object_selector: str = "largest"):
    """Trace Moore-neighbor boundary cycles of the foreground.

    object_selector 'largest' returns the single Contour of the largest
    component; 'all' returns a list of Contours ordered by descending area.
    """
    m = as_binary_mask(mask)
    labels, count = label_components(m)
    if count == 0:
        raise EmptyMask("mask has no foreground pixel")
    ranked = ranked_components(labels, count)
    if object_selector == "largest":
        return _trace_component(labels == ranked[0])
    if object_selector == "all":
        return [_trace_component(labels == lab) for lab in ranked]
    raise ValueError(f"unknown object_selector {object_selector!r}")


def _trace_component(component: np.ndarray) -> Contour:
    """Trace one 8-connected component. The walk starts at the first pixel in
    row-major scan order, entered from the west, and follows the clockwise
    Moore scan; it stops when a (pixel, backtrack) state repeats, which also
    covers skinny shapes whose initial state is never re-entered."""
    padded = np.pad(component, 1)
    rows, cols = np.nonzero(padded)
    if rows.size == 0:
        raise EmptyMask("component has no pixel")
    start = (int(rows[0]), int(cols[0]))
    back = (start[0], start[1] - 1)

    cycle = [start]
    seen = {(start, back): 0}
    pixel = start
    while True:
        base = _OFFSET_INDEX[(back[0] - pixel[0], back[1] - pixel[1])]
        nxt = None
        last_bg = back
        for step in range(1, 9):
            dy, dx = _OFFSETS[(base + step) % 8]
            cand = (pixel[0] + dy, pixel[1] + dx)
            if padded[cand]:
                nxt = cand
                break
            last_bg = cand
        if nxt is None:
            break  # isolated pixel
        pixel, back = nxt, last_bg
        state = (pixel, back)
        if state in seen:
            cycle = cycle[seen[state]:]
            break
        seen[state] = len(cycle)
        cycle.append(pixel)

    if len(set(cycle)) < 4:
        raise DegenerateObject(
            f"component has {len(set(cycle))} distinct boundary pixels, need at least 4"
        )

    # canonical start: topmost-then-leftmost pixel of the cycle
    first = min(range(len(cycle)), key=lambda i: cycle[i])
    cycle = cycle[first:] + cycle[:first]

    points = np.asarray(cycle, dtype=np.int64) - 1  # undo padding
    steps = np.hypot(*(np.diff(points, axis=0).T.astype(np.float64)))
    arcs = np.concatenate(([0.0], np.cumsum(steps)))
    closing = float(np.hypot(*(points[0] - points[-1]).astype(np.float64)))
    return Contour(points, arcs, float(arcs[-1] + closing))


def area_centroid(mask, component: int | None = None) -> tuple[float, float]:
    """Arithmetic mean coordinate of foreground pixels.

    With `component`, restrict to that id from label_components; otherwise
    use the whole foreground.
    """
    m = as_binary_mask(mask)
    if component is None:
        sel = m > 0
    else:
        labels, count = label_components(m)
        if component < 1 or component > count:
            raise EmptyMask(f"component {component} does not exist (count {count})")
        sel = labels == component
    rows, cols = np.nonzero(sel)
    if rows.size == 0:
        raise EmptyMask("no foreground pixel to average")
    return float(rows.mean()), float(cols.mean())


def radial_profile(contour: Contour, centroid: tuple[float, float]) -> RadialProfile:
    """Sample the distance-to-center function along a contour."""
    diff = contour.points.astype(np.float64) - np.asarray(centroid, dtype=np.float64)
    xi = np.hypot(diff[:, 0], diff[:, 1])
    if float(xi.min()) <= 1e-9:
        raise CentroidOnContour("centroid lies on the contour; radii would vanish")
    deltas = np.empty_like(xi)
    deltas[0] = xi[-1] - xi[0]
    deltas[1:] = xi[:-1] - xi[1:]
    widths = contour.segment_lengths
    mean_radius = float((xi * widths).sum() / contour.total_length)
    return RadialProfile(
        centroid=(float(centroid[0]), float(centroid[1])),
        xi=xi,
        deltas=deltas,
        arc_lengths=contour.arc_lengths.copy(),
        total_length=contour.total_length,
        mean_radius=mean_radius,
    )


def profile_from_samples(
    xi,
    total_length: float | None = None,
    arc_lengths=None,
    centroid: tuple[float, float] = (0.0, 0.0),
) -> RadialProfile:
    """Build a RadialProfile from explicit samples, bypassing rasterization.

    Without arc_lengths the samples sit on a uniform arc grid over
    [0, total_length); total_length defaults to the sample count.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if xi.ndim != 1 or xi.size < 1:
        raise InvalidParams("xi must be a nonempty 1-D array")
    if float(xi.min()) <= 0.0:
        raise InvalidParams("xi samples must be strictly positive")
    if arc_lengths is None:
        length = float(total_length) if total_length is not None else float(xi.size)
        arcs = np.arange(xi.size, dtype=np.float64) * (length / xi.size)
    else:
        arcs = np.asarray(arc_lengths, dtype=np.float64)
        if arcs.shape != xi.shape or arcs[0] != 0.0 or (np.diff(arcs) <= 0).any():
            raise InvalidParams("arc_lengths must start at 0 and strictly increase")
        if total_length is None or total_length <= arcs[-1]:
            raise InvalidParams("total_length must exceed the last arc position")
        length = float(total_length)
    deltas = np.empty_like(xi)
    deltas[0] = xi[-1] - xi[0]
    deltas[1:] = xi[:-1] - xi[1:]
    widths = np.diff(arcs, append=length)
    mean_radius = float((xi * widths).sum() / length)
    return RadialProfile(
        centroid=(float(centroid[0]), float(centroid[1])),
        xi=xi,
        deltas=deltas,
        arc_lengths=arcs,
        total_length=length,
        mean_radius=mean_radius,
    )


def rasterize_contour(contour: Contour, shape: tuple[int, int]) -> np.ndarray:
    """Mark the contour pixels on an otherwise empty mask."""
    out = np.zeros(shape, dtype=np.uint8)
    out[contour.points[:, 0], contour.points[:, 1]] = 1
    return out


def write_contour_csv(contour: Contour, profile: RadialProfile, path) -> None:
    """Write rows t,row,col,l_t,xi_t for one traced contour."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "row", "col", "l_t", "xi_t"])
        for t in range(len(contour)):
            writer.writerow(
                [
                    t,
                    int(contour.points[t, 0]),
                    int(contour.points[t, 1]),
                    repr(float(contour.arc_lengths[t])),
                    repr(float(profile.xi[t])),
                ]
            )
