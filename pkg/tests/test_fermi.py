import math

import numpy as np
import pytest

from sobex.comparison import jacobi_factor, mean_curvature_bound
from sobex.errors import FocalPointError, InvalidDomainError, OutOfTubeError
from sobex.fermi import (
    DomainSpec,
    FermiChart,
    GeodesicDisk,
    RadialProfile,
    check_regularity,
)
from sobex.surfaces import GeodesicState, JacobiValue, integrate_geodesic, jacobi_transport


def test_boundary_point_disk(unit_disk):
    bp = unit_disk.boundary_point(0.7)
    assert bp.second_fundamental[0] == pytest.approx(-1.0, abs=1e-14)
    assert bp.speed[0] == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(bp.normal[0], [1.0, 0.0])


def test_boundary_point_cap(spherical_cap, sphere):
    a = math.pi / 4.0
    bp = spherical_cap.boundary_point(1.1)
    assert abs(bp.second_fundamental[0]) == pytest.approx(1.0 / math.tan(a), abs=1e-12)
    assert bp.speed[0] == pytest.approx(math.sin(a), abs=1e-14)
    # cross-check the spread sign by shooting the normal Jacobi field
    start = GeodesicState(position=(a, 1.1), velocity=(1.0, 0.0))
    traj = integrate_geodesic(sphere, start, 0.4, tol=1e-11)
    out = jacobi_transport(sphere, traj, JacobiValue(1.0, float(bp.spread[0])), s=0.4)
    assert out.value == pytest.approx(math.sin(a + 0.4) / math.sin(a), abs=1e-9)


def test_circle_profile_matches_disk(flat, unit_disk):
    circle = DomainSpec(flat, RadialProfile(cos_coeffs=(1.0,)))
    theta = np.linspace(0.0, 2.0 * math.pi, 17, endpoint=False)
    a = unit_disk.boundary_point(theta)
    b = circle.boundary_point(theta)
    assert np.allclose(a.second_fundamental, b.second_fundamental, atol=1e-10)
    assert np.allclose(a.speed, b.speed, atol=1e-10)
    assert np.allclose(a.point, b.point, atol=1e-10)


def test_rho_positive_required(flat):
    with pytest.raises(InvalidDomainError):
        DomainSpec(flat, RadialProfile(cos_coeffs=(0.5, 0.0, 0.6)))


def test_fermi_map_examples(disk_chart, cap_chart):
    p = disk_chart.fermi_map(0.3, 0.0)
    assert np.allclose(p, [1.3, 0.0], atol=1e-14)
    p = disk_chart.fermi_map(-0.3, 0.0)
    assert np.allclose(p, [0.7, 0.0], atol=1e-14)
    p = cap_chart.fermi_map(0.2, 0.0)
    assert p[0] == pytest.approx(math.pi / 4.0 + 0.2, abs=1e-14)
    with pytest.raises(OutOfTubeError):
        disk_chart.fermi_map(0.5, 0.0)


def test_fermi_invert_examples(disk_chart, flat):
    s, th = disk_chart.fermi_invert(np.array([1.2, 0.0]))
    assert s == pytest.approx(0.2, abs=1e-12)
    assert th == pytest.approx(0.0, abs=1e-12)
    wide = FermiChart(DomainSpec(flat, GeodesicDisk((0.0, 0.0), 1.0)), 0.6)
    s, th = wide.fermi_invert(np.array([0.5, 1.0]))
    assert s == pytest.approx(-0.5, abs=1e-12)
    assert th == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(OutOfTubeError):
        disk_chart.fermi_invert(np.array([1.9, 0.0]))


def test_fermi_invert_blob_newton(flat):
    blob = DomainSpec(flat, RadialProfile(cos_coeffs=(1.0, 0.0, 0.2)))
    chart = FermiChart(blob, 0.25)
    theta0 = math.pi / 4.0
    target = chart.fermi_map(0.11, theta0)
    s, th = chart.fermi_invert(target, tol=1e-11)
    again = chart.fermi_map(s, th)
    err = np.linalg.norm(
        np.array([again[0] * math.cos(again[1]), again[0] * math.sin(again[1])])
        - np.array([target[0] * math.cos(target[1]), target[0] * math.sin(target[1])])
    )
    assert err < 1e-9
    assert s == pytest.approx(0.11, abs=1e-9)
    assert th == pytest.approx(theta0, abs=1e-9)


@pytest.mark.parametrize("chart_name", ["disk_chart", "cap_chart", "blob_chart"])
def test_roundtrip_grid(chart_name, request):
    chart = request.getfixturevalue(chart_name)
    r = chart.r
    s = np.linspace(-0.95 * r, 0.95 * r, 9)
    th = np.linspace(0.0, 2.0 * math.pi, 24, endpoint=False)
    S, T = np.meshgrid(s, th, indexing="ij")
    pts = chart.map_unchecked(S.ravel(), T.ravel())
    s_back, th_back = chart.fermi_invert(pts)
    assert np.max(np.abs(s_back - S.ravel())) < 1e-8
    dth = np.abs(np.angle(np.exp(1j * (th_back - T.ravel()))))
    assert np.max(dth) < 1e-8 / min(float(np.min(chart.samples.speed)), 1.0)


@pytest.mark.parametrize("chart_name", ["disk_chart", "cap_chart", "blob_chart"])
def test_metric_splitting(chart_name, request):
    # the normal parametrization splits the metric: |d psi/ds| = 1 and
    # d psi/ds perpendicular to d psi/dtheta
    chart = request.getfixturevalue(chart_name)
    surf = chart.surface
    h = 1e-6
    s = np.linspace(-0.8 * chart.r, 0.8 * chart.r, 7)
    th = np.linspace(0.0, 2.0 * math.pi, 12, endpoint=False)
    S, T = np.meshgrid(s, th, indexing="ij")
    base = chart.map_unchecked(S.ravel(), T.ravel())
    plus_s = chart.map_unchecked(S.ravel() + h, T.ravel())
    minus_s = chart.map_unchecked(S.ravel() - h, T.ravel())
    plus_t = chart.map_unchecked(S.ravel(), T.ravel() + h)
    minus_t = chart.map_unchecked(S.ravel(), T.ravel() - h)

    def diff(a, b):
        d = (a - b) / (2.0 * h)
        d[:, 1] = np.angle(np.exp(1j * (a[:, 1] - b[:, 1]))) / (2.0 * h)
        return d

    dpsi_s = diff(plus_s, minus_s)
    dpsi_t = diff(plus_t, minus_t)
    f = np.asarray(surf.warp(base[:, 0]), dtype=float)
    norm_s = dpsi_s[:, 0] ** 2 + (f * dpsi_s[:, 1]) ** 2
    cross = dpsi_s[:, 0] * dpsi_t[:, 0] + f**2 * dpsi_s[:, 1] * dpsi_t[:, 1]
    assert np.max(np.abs(norm_s - 1.0)) < 1e-7
    scale = np.maximum(1.0, np.abs(dpsi_t[:, 0]) + np.abs(f * dpsi_t[:, 1]))
    assert np.max(np.abs(cross) / scale) < 1e-7


def test_volume_element_ratio_examples(disk_chart, cap_chart):
    assert disk_chart.volume_element_ratio(0.3, 0.44) == pytest.approx(1.44, abs=1e-14)
    assert disk_chart.volume_element_ratio(1.2, 0.0) == 1.0
    a = math.pi / 4.0
    for s in (-0.2, 0.1, 0.25):
        assert cap_chart.volume_element_ratio(0.5, s) == pytest.approx(
            math.sin(a + s) / math.sin(a), abs=1e-14)


@pytest.mark.parametrize("chart_name", ["disk_chart", "cap_chart", "blob_chart"])
def test_comparison_sandwich(chart_name, request):
    chart = request.getfixturevalue(chart_name)
    data = chart.curvature_data()
    sig_lo, sig_hi = -data.H_max, -data.H_min
    th = np.linspace(0.0, 2.0 * math.pi, 48, endpoint=False)
    s = np.linspace(0.0, 0.9 * chart.r, 12)
    for si in s:
        ratio = np.asarray(chart.volume_element_ratio(th, np.full_like(th, si)))
        lower = jacobi_factor(data.K_upper, sig_lo, si) ** (data.n - 1)
        upper = jacobi_factor(data.k_lower, sig_hi, si) ** (data.n - 1)
        assert np.all(ratio >= lower * (1.0 - 1e-6))
        assert np.all(ratio <= upper * (1.0 + 1e-6))


@pytest.mark.parametrize("chart_name", ["disk_chart", "cap_chart", "blob_chart"])
def test_mean_curvature_comparison(chart_name, request):
    # d/ds log(ratio) stays below the comparison bound with the tube's
    # lower curvature bound and the per-angle boundary spread
    chart = request.getfixturevalue(chart_name)
    data = chart.curvature_data()
    th = np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False)
    spread = chart.boundary_point(th).spread
    for si in np.linspace(0.0, 0.9 * chart.r, 10):
        slope = np.asarray(chart.log_ratio_slope(th, np.full_like(th, si)))
        bound = np.array([
            mean_curvature_bound(data.k_lower, sg, si, data.n) for sg in spread
        ])
        assert np.all(slope <= bound + 1e-6)


def test_check_regularity_disk(unit_disk):
    rep = check_regularity(unit_disk, 0.5)
    assert rep.admissible
    assert rep.H == pytest.approx(1.0, abs=1e-12)
    assert rep.K == 0.0
    assert rep.r0 == pytest.approx(1.0, abs=1e-12)
    assert rep.interior_margin > -1e-9
    assert rep.exterior_margin > -1e-9
    d = rep.to_dict()
    assert d["admissible"] is True


def test_check_regularity_disk_too_fat(unit_disk):
    rep = check_regularity(unit_disk, 1.5)
    assert not rep.admissible
    assert not rep.interior_ball_ok


def test_check_regularity_neck(flat):
    # deep three-lobed neck: the tube self-overlaps, mirroring the
    # problematic-neighborhood failure mode
    neck = DomainSpec(flat, RadialProfile(cos_coeffs=(1.0, 0.0, 0.0, 0.45)))
    rep = check_regularity(neck, 0.35)
    assert not rep.admissible
    assert (not rep.exterior_ball_ok) or (not rep.injectivity_ok)


def test_check_regularity_cap(spherical_cap):
    rep = check_regularity(spherical_cap, 0.3)
    assert rep.admissible
    assert rep.K == pytest.approx(1.0)
    assert rep.H == pytest.approx(1.0, abs=1e-9)


def test_focal_guard(flat):
    small = DomainSpec(flat, GeodesicDisk((0.0, 0.0), 0.4))
    with pytest.raises(FocalPointError):
        FermiChart(small, 0.45)  # reaches the disk centre


def test_ambiguous_foot_detected(flat):
    from sobex.errors import FootAmbiguityError

    blob = DomainSpec(flat, RadialProfile(cos_coeffs=(1.0, 0.0, 0.15)))
    chart = FermiChart(blob, 0.3)
    # a point essentially at the origin is equidistant from the two
    # nearest lobes of the symmetric boundary
    with pytest.raises(FootAmbiguityError):
        chart.fermi_invert(np.array([1e-7, 0.3]))


def test_off_center_flat_disk(flat):
    off = DomainSpec(flat, GeodesicDisk((0.5, 1.0), 0.8))  # centre at polar (0.5, 1.0)
    chart = FermiChart(off, 0.3)
    s, th = chart.fermi_invert(chart.fermi_map(0.2, 0.9))
    assert s == pytest.approx(0.2, abs=1e-12)
    assert th == pytest.approx(0.9, abs=1e-12)
    rep = check_regularity(off, 0.3)
    assert rep.admissible
