import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hynp

from fouriershape.contour import (
    area_centroid,
    profile_from_samples,
    radial_profile,
    trace_contour,
)
from fouriershape.errors import ArcOutOfRange, InvalidOrder, PnmError
from fouriershape.fourier import (
    fill_polygon,
    fourier_coefficients,
    read_descriptors_csv,
    reconstruct_boundary,
    reconstruct_profile,
    write_descriptors_csv,
)


def staircase_reference(profile, order):
    """Series coefficients of the piecewise-constant profile, integrated
    segment by segment in closed form. Independent of the increment formula."""
    arcs = profile.arc_lengths
    length = profile.total_length
    ends = np.append(arcs[1:], length)
    a = np.zeros(order)
    b = np.zeros(order)
    for n in range(1, order + 1):
        k = 2.0 * np.pi * n / length
        # (2/L) * integral of xi(l) cos(k l) over each constant segment
        a[n - 1] = (2.0 / length) * np.sum(
            profile.xi * (np.sin(k * ends) - np.sin(k * arcs)) / k
        )
        b[n - 1] = (2.0 / length) * np.sum(
            profile.xi * (-np.cos(k * ends) + np.cos(k * arcs)) / k
        )
    return a, b


def disk_mask(radius=20, size=64):
    yy, xx = np.mgrid[:size, :size]
    return (np.hypot(yy - size // 2, xx - size // 2) <= radius).astype(np.uint8)


def describe_mask(mask, order):
    contour = trace_contour(mask)
    profile = radial_profile(contour, area_centroid(mask))
    return contour, profile, fourier_coefficients(profile, order)


# ------------------------------------------------------------- coefficients


def test_two_level_staircase_hand_value():
    # xi = 1 on the first half period, 2 on the second:
    # all cosine terms vanish and b_n = -(1 - cos(pi n)) / (pi n)
    profile = profile_from_samples([1.0] * 4 + [2.0] * 4, total_length=8.0)
    desc = fourier_coefficients(profile, 4)
    expected_b = [-2.0 / np.pi, 0.0, -2.0 / (3.0 * np.pi), 0.0]
    assert np.allclose(desc.coeffs[:, 0], 0.0, atol=1e-15)
    assert np.allclose(desc.coeffs[:, 1], expected_b, atol=1e-15)
    assert desc.a0 == 1.5
    assert np.allclose(desc.amplitudes, np.abs(expected_b))


def test_constant_profile_null():
    profile = profile_from_samples(np.full(32, 7.5), total_length=100.0)
    desc = fourier_coefficients(profile, 8)
    assert np.all(desc.amplitudes < 1e-12)
    assert desc.a0 == 7.5


def test_increment_form_matches_segment_integrals():
    rng = np.random.default_rng(11)
    for _ in range(10):
        count = int(rng.integers(8, 40))
        xi = rng.uniform(0.5, 3.0, count)
        arcs = np.concatenate(([0.0], np.sort(rng.uniform(0.1, 9.9, count - 1))))
        profile = profile_from_samples(xi, total_length=10.0, arc_lengths=arcs)
        desc = fourier_coefficients(profile, 4)
        ref_a, ref_b = staircase_reference(profile, 4)
        assert np.allclose(desc.coeffs[:, 0], ref_a, atol=1e-12)
        assert np.allclose(desc.coeffs[:, 1], ref_b, atol=1e-12)


def test_order_validation():
    profile = profile_from_samples([1.0, 2.0, 1.0, 2.0, 1.0, 2.0])
    with pytest.raises(InvalidOrder):
        fourier_coefficients(profile, 0)
    with pytest.raises(InvalidOrder):
        fourier_coefficients(profile, 4)  # 2 * 4 > 6 samples
    with pytest.raises(InvalidOrder):
        fourier_coefficients(profile_from_samples([1.0, 2.0, 3.0]), 1)


def test_start_point_rotation_leaves_amplitudes(shape_corpus):
    mask = shape_corpus[0]
    contour = trace_contour(mask)
    centroid = area_centroid(mask)
    profile = radial_profile(contour, centroid)
    base = fourier_coefficients(profile, 4).amplitudes
    shift = len(profile) // 3
    rolled = profile_from_samples(
        np.roll(profile.xi, -shift),
        total_length=profile.total_length,
        arc_lengths=np.concatenate(
            (
                profile.arc_lengths[shift:] - profile.arc_lengths[shift],
                profile.arc_lengths[:shift]
                + (profile.total_length - profile.arc_lengths[shift]),
            )
        ),
        centroid=centroid,
    )
    rotated = fourier_coefficients(rolled, 4).amplitudes
    assert np.allclose(rotated, base, atol=1e-9)


def test_translation_leaves_amplitudes(shape_corpus):
    for mask in shape_corpus[:5]:
        *_, desc = describe_mask(mask, 4)
        moved = np.zeros((mask.shape[0] + 9, mask.shape[1] + 5), dtype=np.uint8)
        moved[7 : 7 + mask.shape[0], 2 : 2 + mask.shape[1]] = mask
        *_, desc_moved = describe_mask(moved, 4)
        assert np.allclose(desc_moved.amplitudes, desc.amplitudes, atol=1e-9)
        assert np.isclose(desc_moved.a0, desc.a0, atol=1e-9)


def test_quarter_turn_leaves_amplitudes(shape_corpus):
    for mask in shape_corpus[:5]:
        *_, desc = describe_mask(mask, 4)
        *_, desc_rot = describe_mask(np.rot90(mask).copy(), 4)
        assert np.allclose(desc_rot.amplitudes, desc.amplitudes, atol=1e-6)


@settings(max_examples=40, deadline=None)
@given(
    hynp.arrays(
        np.float64,
        st.integers(8, 48),
        elements=st.floats(0.2, 5.0, allow_nan=False),
    )
)
def test_amplitudes_are_coefficient_norms(xi):
    profile = profile_from_samples(xi, total_length=float(xi.size))
    desc = fourier_coefficients(profile, 3)
    assert np.array_equal(
        desc.amplitudes, np.hypot(desc.coeffs[:, 0], desc.coeffs[:, 1])
    )
    ref_a, ref_b = staircase_reference(profile, 3)
    assert np.allclose(desc.coeffs[:, 0], ref_a, atol=1e-10)
    assert np.allclose(desc.coeffs[:, 1], ref_b, atol=1e-10)


# ------------------------------------------------------------ reconstruction


def test_reconstruct_profile_bounds():
    profile = profile_from_samples([1.0, 2.0, 1.0, 2.0], total_length=4.0)
    desc = fourier_coefficients(profile, 2)
    with pytest.raises(ArcOutOfRange):
        reconstruct_profile(desc, [-0.1])
    with pytest.raises(ArcOutOfRange):
        reconstruct_profile(desc, [4.5])
    values = reconstruct_profile(desc, [0.0, 4.0])
    assert np.isclose(values[0], values[1])  # periodic endpoints


def test_reconstruction_l2_error_shrinks_with_order(shape_corpus):
    mask = shape_corpus[1]
    contour = trace_contour(mask)
    profile = radial_profile(contour, area_centroid(mask))
    dense = np.linspace(0.0, profile.total_length, 4096, endpoint=False)
    staircase = profile.xi[
        np.searchsorted(profile.arc_lengths, dense, side="right") - 1
    ]
    errors = []
    for order in (1, 2, 4, 8):
        desc = fourier_coefficients(profile, order)
        recon = reconstruct_profile(desc, dense)
        errors.append(float(np.mean((recon - staircase) ** 2)))
    assert errors == sorted(errors, reverse=True)


def test_reconstruct_boundary_rays(shape_corpus):
    mask = shape_corpus[2]
    contour, profile, desc = describe_mask(mask, 8)
    points = reconstruct_boundary(contour, desc, profile.centroid)
    assert points.shape == contour.points.shape
    # every reconstructed point sits on the ray toward its source point
    diff = points - np.asarray(profile.centroid)
    orig = contour.points - np.asarray(profile.centroid)
    cross = diff[:, 0] * orig[:, 1] - diff[:, 1] * orig[:, 0]
    assert np.allclose(cross, 0.0, atol=1e-6)
    assert np.all(diff[:, 0] * orig[:, 0] + diff[:, 1] * orig[:, 1] > 0)


def test_fill_polygon_square():
    square = np.array([[1.0, 1.0], [1.0, 4.0], [4.0, 4.0], [4.0, 1.0]])
    mask = fill_polygon(square, (6, 6))
    expected = np.zeros((6, 6), dtype=np.uint8)
    # half-open scanline spans, plus the stamped vertices on the last row
    expected[1:4, 1:5] = 1
    expected[4, 1] = expected[4, 4] = 1
    assert np.array_equal(mask, expected)


def test_fill_polygon_clips_to_shape():
    triangle = np.array([[-2.0, -2.0], [-2.0, 8.0], [8.0, 8.0]])
    mask = fill_polygon(triangle, (4, 4))
    assert mask.shape == (4, 4)
    assert mask[0, 3] == 1


def test_disk_reconstruction_round_trip():
    mask = disk_mask()
    contour, profile, desc = describe_mask(mask, 8)
    points = reconstruct_boundary(contour, desc, profile.centroid)
    refilled = fill_polygon(points, mask.shape)
    both = np.logical_and(refilled, mask).sum()
    either = np.logical_or(refilled, mask).sum()
    assert both / either > 0.95


# ------------------------------------------------------------------- files


def test_descriptor_csv_round_trip(tmp_path, shape_corpus):
    *_, desc = describe_mask(shape_corpus[3], 6)
    path = tmp_path / "desc.csv"
    write_descriptors_csv(desc, path)
    back = read_descriptors_csv(path)
    assert back.order == desc.order
    assert back.a0 == desc.a0
    assert back.total_length == desc.total_length
    assert np.array_equal(back.coeffs, desc.coeffs)
    assert np.array_equal(back.amplitudes, desc.amplitudes)


def test_descriptor_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("n,a_n\n1,2\n")
    with pytest.raises(PnmError):
        read_descriptors_csv(path)
