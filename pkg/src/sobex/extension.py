"""The boundary extension operator and its certification machinery.

A field ``u`` defined on a closed domain is pushed across the boundary
along the normal geodesics of a :class:`~sobex.fermi.FermiChart` by the
one-dimensional reflection rule

    (E u)(s) = (-3 u(-s) + 4 u(-s/2)) * phi(s),   0 < s < r,

which reproduces constants and affine traces and matches one-sided
first derivatives at the boundary.  ``phi`` is a cutoff of the tube
depth with ``|phi'| <= G / r``, equal to 1 up to depth ``r/2`` and 0 at
depth ``r``.  The module provides pointwise evaluation of the extended
field, quadrature H1 norms over the domain and the exterior tube, the
per-geodesic inequality check and the global operator-norm estimate
against the closed-form bound from :mod:`sobex.comparison`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .comparison import (
    ComparisonProfile,
    distortion_factor,
    extension_norm_bound,
)
from .errors import (
    EvaluationError,
    FootAmbiguityError,
    OutOfTubeError,
    ParameterError,
    RegularityError,
)
from .fermi import FermiChart
from .quadrature import composite_gauss, gauss_legendre, periodic_nodes
from .surfaces import constant_curvature_distance

__all__ = [
    "ScalarField",
    "constant_field",
    "polynomial_field",
    "trig_field",
    "random_smooth_fields",
    "CutoffFamily",
    "smoothstep_cutoff",
    "cutoff_value",
    "Trace1D",
    "random_fourier_trace",
    "extend_1d",
    "ExtendedField",
    "h1_norm",
    "verify_1d_inequality",
    "OperatorNormResult",
    "operator_norm_estimate",
    "c1_matching_error",
]


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """A C1 (or C2) field on a closed domain with analytic chart partials.

    ``evaluate`` maps chart points of shape (N, 2) to values (N,);
    ``partials`` returns the coordinate partials (d/dr, d/dtheta) as
    an (N, 2) array.
    """

    evaluate: Callable = dc_field(repr=False)
    partials: Callable = dc_field(repr=False)
    smoothness: str = "C2"
    label: str = ""


def _embedded(points):
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r, th = pts[:, 0], pts[:, 1]
    return r, th, r * np.cos(th), r * np.sin(th)


def constant_field(c=1.0):
    def ev(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.full(pts.shape[0], float(c))

    def grad(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.zeros((pts.shape[0], 2))

    return ScalarField(ev, grad, label=f"const({c})")


def polynomial_field(coeffs):
    """Polynomial in the embedded coordinates ``(r cos t, r sin t)``.

    ``coeffs[i, j]`` multiplies ``x^i y^j``.  Smooth across the chart
    pole, hence usable on every supported domain.
    """
    coeffs = np.asarray(coeffs, dtype=float)

    def ev(points):
        r, th, x, y = _embedded(points)
        out = np.zeros_like(x)
        for i in range(coeffs.shape[0]):
            for j in range(coeffs.shape[1]):
                if coeffs[i, j] != 0.0:
                    out += coeffs[i, j] * x**i * y**j
        return out

    def grad(points):
        r, th, x, y = _embedded(points)
        ux = np.zeros_like(x)
        uy = np.zeros_like(x)
        for i in range(coeffs.shape[0]):
            for j in range(coeffs.shape[1]):
                c = coeffs[i, j]
                if c == 0.0:
                    continue
                if i > 0:
                    ux += c * i * x ** (i - 1) * y**j
                if j > 0:
                    uy += c * j * x**i * y ** (j - 1)
        ct, st = np.cos(th), np.sin(th)
        dr = ux * ct + uy * st
        dth = ux * (-r * st) + uy * (r * ct)
        return np.stack([dr, dth], axis=-1)

    return ScalarField(ev, grad, label="poly")


def trig_field(amps, waves, phases):
    """Plane-wave mixture ``sum_m a_m sin(k_m . (x, y) + p_m)``."""
    amps = np.asarray(amps, dtype=float)
    waves = np.asarray(waves, dtype=float)  # (M, 2)
    phases = np.asarray(phases, dtype=float)

    def ev(points):
        r, th, x, y = _embedded(points)
        out = np.zeros_like(x)
        for a, k, p in zip(amps, waves, phases):
            out += a * np.sin(k[0] * x + k[1] * y + p)
        return out

    def grad(points):
        r, th, x, y = _embedded(points)
        ux = np.zeros_like(x)
        uy = np.zeros_like(x)
        for a, k, p in zip(amps, waves, phases):
            c = a * np.cos(k[0] * x + k[1] * y + p)
            ux += c * k[0]
            uy += c * k[1]
        ct, st = np.cos(th), np.sin(th)
        return np.stack([ux * ct + uy * st, -ux * r * st + uy * r * ct], axis=-1)

    return ScalarField(ev, grad, label="trig")


def random_smooth_fields(rng, count, degree=4, scale=1.0, trig_share=0.5):
    """A deterministic sample of smooth test fields (seeded ``rng``)."""
    fields = []
    for m in range(count):
        if rng.uniform() < trig_share:
            n_waves = int(rng.integers(1, 4))
            amps = scale * rng.normal(size=n_waves)
            waves = rng.normal(size=(n_waves, 2)) * 1.5
            phases = rng.uniform(0.0, 2.0 * math.pi, size=n_waves)
            fields.append(trig_field(amps, waves, phases))
        else:
            c = rng.normal(size=(degree + 1, degree + 1)) * scale
            for i in range(degree + 1):
                for j in range(degree + 1):
                    if i + j > degree:
                        c[i, j] = 0.0
                    else:
                        c[i, j] /= math.factorial(i + j) if i + j else 1.0
            fields.append(polynomial_field(c))
    return fields


# ---------------------------------------------------------------------------
# cutoffs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffFamily:
    """1D cutoff profile on [0, inf): 1 on [0, 1/2], 0 from ``t_end`` on.

    ``eta`` is C1 and monotone on the transition band
    ``[1/2, t_end] subset [1/2, 1]`` with ``sup |eta'| = G``.  Applied
    to the relative tube depth ``s / r`` it yields gradient bound
    ``G / r``.
    """

    eta: Callable = dc_field(repr=False)
    eta_prime: Callable = dc_field(repr=False)
    G: float = 3.0
    t_end: float = 1.0
    label: str = "smoothstep"


def smoothstep_cutoff(G=3.0):
    """Cubic smoothstep cutoff with gradient budget ``G`` (minimum 3).

    The transition band is ``[1/2, 1/2 + 3/(2G)]``; at the minimum
    ``G = 3`` it fills ``[1/2, 1]`` exactly.
    """
    if G < 3.0:
        raise ParameterError("the cubic smoothstep needs G >= 3")
    w = 1.5 / G
    t_end = 0.5 + w

    def eta(t):
        t = np.asarray(t, dtype=float)
        x = np.clip((t - 0.5) / w, 0.0, 1.0)
        return 1.0 - (3.0 * x * x - 2.0 * x * x * x)

    def eta_prime(t):
        t = np.asarray(t, dtype=float)
        x = (t - 0.5) / w
        inside = (x > 0.0) & (x < 1.0)
        return np.where(inside, -(6.0 * x - 6.0 * x * x) / w, 0.0)

    return CutoffFamily(eta=eta, eta_prime=eta_prime, G=float(G), t_end=t_end,
                        label=f"smoothstep(G={G:g})")


def cutoff_value(family: CutoffFamily, surface, center, r, points):
    """Ambient-ball cutoff ``eta(d(center, point) / r)``.

    Needs a computable distance, i.e. a constant-curvature surface.
    """
    if surface.kind != "constant":
        raise ParameterError("ambient-ball cutoffs need a closed-form distance")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = constant_curvature_distance(surface.kappa, pts,
                                    np.asarray(center, dtype=float))
    out = family.eta(d / float(r))
    return float(out[0]) if np.ndim(points) == 1 else out


# ---------------------------------------------------------------------------
# one-dimensional extension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trace1D:
    """A C1 trace on the inward ray: value and derivative callables."""

    value: Callable = dc_field(repr=False)
    derivative: Callable = dc_field(repr=False)
    label: str = ""


def random_fourier_trace(rng, modes=5, scale=1.0):
    a = scale * rng.normal(size=modes + 1) / (1.0 + np.arange(modes + 1))
    b = scale * rng.normal(size=modes) / (1.0 + np.arange(1, modes + 1))

    def value(t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, a[0])
        for k in range(1, modes + 1):
            out = out + a[k] * np.cos(k * math.pi * t) + b[k - 1] * np.sin(k * math.pi * t)
        return out

    def derivative(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k in range(1, modes + 1):
            w = k * math.pi
            out = out - a[k] * w * np.sin(w * t) + b[k - 1] * w * np.cos(w * t)
        return out

    return Trace1D(value, derivative, label="fourier")


def extend_1d(trace, cutoff_profile, s):
    """Reflected extension of a one-sided trace along one geodesic.

    ``trace`` is defined on ``(-r, 0]``; for ``s > 0`` the value is
    ``(-3 trace(-s) + 4 trace(-s/2)) * cutoff_profile(s)``.
    Reproduces constant and affine traces where the cutoff equals 1.
    """
    s = np.asarray(s, dtype=float)
    neg = np.minimum(s, 0.0)
    pos = np.maximum(s, 0.0)
    inside_vals = np.asarray(trace(neg), dtype=float)
    reflected = -3.0 * np.asarray(trace(-pos), dtype=float) \
        + 4.0 * np.asarray(trace(-pos / 2.0), dtype=float)
    out = np.where(s <= 0.0, inside_vals,
                   reflected * np.asarray(cutoff_profile(pos), dtype=float))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# the extended field
# ---------------------------------------------------------------------------


class ExtendedField:
    """Pointwise evaluator of the extended field over the whole chart.

    Three branches: the source field itself on the closed domain
    (identical code path, so the restriction identity is exact), the
    reflection formula with depth cutoff on the exterior tube, and zero
    beyond.  Evaluation is pure and vectorized.
    """

    def __init__(self, chart: FermiChart, source: ScalarField, cutoff: CutoffFamily):
        self.chart = chart
        self.source = source
        self.cutoff = cutoff
        self.r = chart.r

    @property
    def s_breakpoints(self):
        """Depths where the cutoff (hence the integrand) loses smoothness."""
        return (0.5 * self.r, min(self.cutoff.t_end, 1.0) * self.r)

    def depth_cutoff(self, s):
        return self.cutoff.eta(np.asarray(s, dtype=float) / self.r)

    def tube_profile(self, s, theta):
        """Extended values at known tube coordinates (no inversion needed)."""
        s = np.asarray(s, dtype=float)
        theta = np.asarray(theta, dtype=float)
        p_full = self.chart.map_unchecked(-s, theta)
        p_half = self.chart.map_unchecked(-0.5 * s, theta)
        shape = p_full.shape[:-1]
        vals = (
            -3.0 * self.source.evaluate(p_full.reshape(-1, 2)).reshape(shape)
            + 4.0 * self.source.evaluate(p_half.reshape(-1, 2)).reshape(shape)
        )
        return vals * self.depth_cutoff(s)

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.zeros(pts.shape[0])
        inside = self.chart.domain.contains(pts)
        if np.any(inside):
            vals[inside] = self.source.evaluate(pts[inside])
        out_idx = np.nonzero(~inside)[0]
        if out_idx.size:
            s, th, ok, amb = self.chart.invert_soft(pts[out_idx])
            in_tube = ok & ~amb & (s > 0.0) & (s < self.r)
            bad = amb & (np.abs(s) < self.r)
            if np.any(bad):
                raise FootAmbiguityError(
                    "ambiguous boundary foot inside the tube; domain is not regular"
                )
            if np.any(~ok & ~amb & (np.abs(s) < self.r)):
                raise OutOfTubeError("foot-point inversion failed inside the tube")
            sel = out_idx[in_tube]
            if sel.size:
                vals[sel] = self.tube_profile(s[in_tube], th[in_tube])
        return float(vals[0]) if np.ndim(points) == 1 else vals

    # -- analytic tube partials (Jacobi-frame identity, used as cross-check) --

    def fermi_partials(self, s, theta):
        """Analytic (d/ds, d/dtheta) of the extension in tube coordinates."""
        s = np.asarray(s, dtype=float)
        theta = np.asarray(theta, dtype=float)
        eng = self.chart.engine
        p_full = eng.map(-s, theta)
        p_half = eng.map(-0.5 * s, theta)
        g_full = self.source.partials(p_full.reshape(-1, 2)).reshape(s.shape + (2,))
        g_half = self.source.partials(p_half.reshape(-1, 2)).reshape(s.shape + (2,))
        u_full = self.source.evaluate(p_full.reshape(-1, 2)).reshape(s.shape)
        u_half = self.source.evaluate(p_half.reshape(-1, 2)).reshape(s.shape)

        # d/ds: chain rule along the normal geodesic plus the cutoff term
        j_full = eng.s_jacobian(-s, theta)
        j_half = eng.s_jacobian(-0.5 * s, theta)
        du_full_ds = np.sum(g_full * j_full, axis=-1)
        du_half_ds = np.sum(g_half * j_half, axis=-1)
        eta = self.depth_cutoff(s)
        eta_p = self.cutoff.eta_prime(s / self.r) / self.r
        base = -3.0 * u_full + 4.0 * u_half
        d_s = (3.0 * du_full_ds - 2.0 * du_half_ds) * eta + base * eta_p

        jt_full = eng.theta_jacobian(-s, theta)
        jt_half = eng.theta_jacobian(-0.5 * s, theta)
        du_full_t = np.sum(g_full * jt_full, axis=-1)
        du_half_t = np.sum(g_half * jt_half, axis=-1)
        d_t = (-3.0 * du_full_t + 4.0 * du_half_t) * eta
        return d_s, d_t


# ---------------------------------------------------------------------------
# quadrature H1 norms
# ---------------------------------------------------------------------------


def _omega_grid(chart: FermiChart, quad: int):
    key = ("omega", quad)
    cached = chart._quad_cache.get(key)
    if cached is not None:
        return cached
    eng = chart.engine
    n_t = max(2 * quad, 64)
    theta, w_t = periodic_nodes(n_t)
    radius = eng.radial_extent(theta)

    if radius is None:
        # off-centre flat circle: integrate polar about its own centre
        a = eng.a
        x, w_r = gauss_legendre(quad, 0.0, a)
        R, T = np.meshgrid(x, theta, indexing="ij")
        W = np.outer(w_r * x, w_t)
        cart = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1) + eng.c0
        from .surfaces import cartesian_to_polar

        pts = cartesian_to_polar(cart.reshape(-1, 2))
        grid = dict(points=pts, weights=W.ravel(), boundary_r=None)
        chart._quad_cache[key] = grid
        return grid

    # per-angle radial Gauss rule, scaled to the boundary radius
    x01, w01 = gauss_legendre(quad, 0.0, 1.0)
    R = np.outer(x01, radius)                       # (quad, n_t)
    T = np.broadcast_to(theta, R.shape)
    f = np.asarray(chart.surface.warp(R), dtype=float)
    W = np.outer(w01, radius * w_t) * f
    grid = dict(
        points=np.stack([R.ravel(), T.ravel()], axis=-1),
        weights=W.ravel(),
        boundary_r=np.broadcast_to(radius, R.shape).ravel(),
    )
    chart._quad_cache[key] = grid
    return grid


def _tube_grid(chart: FermiChart, quad: int, s_breaks):
    key = ("tube", quad, tuple(np.round(s_breaks, 15)))
    cached = chart._quad_cache.get(key)
    if cached is not None:
        return cached
    r = chart.r
    breaks = sorted({0.0, r} | {float(b) for b in s_breaks if 0.0 < b < r})
    s_nodes, s_w = composite_gauss(quad, breaks)
    n_t = max(2 * quad, 64)
    theta, w_t = periodic_nodes(n_t)
    S, T = np.meshgrid(s_nodes, theta, indexing="ij")
    speed = chart.boundary_point(theta).speed
    ratio = chart.engine.ratio(T, S)
    W = s_w[:, None] * w_t[None, :] * speed[None, :] * ratio
    metric = speed[None, :] * ratio  # angular length element g_theta^(1/2)
    grid = dict(S=S, T=T, weights=W, metric=metric)
    chart._quad_cache[key] = grid
    return grid


def _chart_fd_partials(evaluate, pts, surface, boundary_r, step):
    """Central chart-coordinate finite differences with pole reflection."""
    r, th = pts[:, 0], pts[:, 1]
    h = step

    def ev_at(rr, tt):
        rr = np.asarray(rr, dtype=float)
        tt = np.asarray(tt, dtype=float)
        flip = rr < 0.0
        rr = np.where(flip, -rr, rr)
        tt = np.where(flip, tt + math.pi, tt)
        return evaluate(np.stack([rr, np.mod(tt, 2.0 * math.pi)], axis=-1))

    if boundary_r is not None:
        near = r > boundary_r - 2.0 * h
    else:
        near = np.zeros(r.shape, dtype=bool)
    d_r = np.empty_like(r)
    if np.any(~near):
        d_r[~near] = (ev_at(r[~near] + h, th[~near]) - ev_at(r[~near] - h, th[~near])) / (2 * h)
    if np.any(near):
        rr, tt = r[near], th[near]
        d_r[near] = (3 * ev_at(rr, tt) - 4 * ev_at(rr - h, tt) + ev_at(rr - 2 * h, tt)) / (2 * h)
    d_t = (ev_at(r, th + h) - ev_at(r, th - h)) / (2 * h)
    return np.stack([d_r, d_t], axis=-1)


def h1_norm(evaluator, region, chart: FermiChart, quad: int = 64,
            gradient=None, s_breaks=(), fd_step=None):
    """Squared L2 and gradient-L2 norms over a chart region.

    ``region`` is one of ``{"omega", "tube_exterior", "all"}``.  The
    quadrature is Gauss-Legendre radially (composite across the given
    ``s_breaks`` in the tube, where cutoffs kink) with a uniform
    periodic rule angularly and the exact metric area weights.  The
    gradient is taken from ``gradient`` (a points -> (N, 2) partials
    callable) when given, otherwise by finite differences with step
    ``1e-5 * diam`` using one-sided stencils near branch interfaces.

    Returns ``(l2_sq, grad_l2_sq)``.
    """
    if quad < 16:
        raise ParameterError("need at least 16 quadrature nodes per axis")
    if region == "all":
        a = h1_norm(evaluator, "omega", chart, quad, gradient, s_breaks, fd_step)
        b = h1_norm(evaluator, "tube_exterior", chart, quad, None, s_breaks, fd_step)
        return (a[0] + b[0], a[1] + b[1])
    diam = chart.domain.diameter()
    h = fd_step if fd_step is not None else 1e-5 * diam

    if region == "omega":
        grid = _omega_grid(chart, quad)
        pts, w = grid["points"], grid["weights"]
        vals = np.asarray(evaluator(pts), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("non-finite value at a quadrature node")
        if gradient is not None:
            parts = np.asarray(gradient(pts), dtype=float)
        else:
            parts = _chart_fd_partials(evaluator, pts, chart.surface,
                                       grid["boundary_r"], h)
        f = np.asarray(chart.surface.warp(pts[:, 0]), dtype=float)
        grad_sq = parts[:, 0] ** 2 + (parts[:, 1] / f) ** 2
        return float(np.sum(w * vals**2)), float(np.sum(w * grad_sq))

    if region != "tube_exterior":
        raise ParameterError(f"unknown region {region!r}")

    grid = _tube_grid(chart, quad, s_breaks)
    S, T, W, metric = grid["S"], grid["T"], grid["weights"], grid["metric"]

    if hasattr(evaluator, "tube_profile"):
        def F(s, t):
            return np.asarray(evaluator.tube_profile(s, t), dtype=float)
    else:
        def F(s, t):
            pts = chart.map_unchecked(s, t)
            return np.asarray(evaluator(pts.reshape(-1, 2)), dtype=float).reshape(s.shape)

    vals = F(S, T)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("non-finite value at a tube quadrature node")
    if gradient is not None:
        d_s, d_t = gradient(S, T)
    else:
        r = chart.r
        lo_side = S < 2.0 * h
        hi_side = S > r - 2.0 * h
        mid = ~(lo_side | hi_side)
        d_s = np.empty_like(S)
        if np.any(mid):
            d_s[mid] = (F(S[mid] + h, T[mid]) - F(S[mid] - h, T[mid])) / (2 * h)
        if np.any(lo_side):
            s0, t0 = S[lo_side], T[lo_side]
            d_s[lo_side] = (-3 * F(s0, t0) + 4 * F(s0 + h, t0) - F(s0 + 2 * h, t0)) / (2 * h)
        if np.any(hi_side):
            s0, t0 = S[hi_side], T[hi_side]
            d_s[hi_side] = (3 * F(s0, t0) - 4 * F(s0 - h, t0) + F(s0 - 2 * h, t0)) / (2 * h)
        d_t = (F(S, T + h) - F(S, T - h)) / (2 * h)
    grad_sq = d_s**2 + (d_t / metric) ** 2
    return float(np.sum(W * vals**2)), float(np.sum(W * grad_sq))


# ---------------------------------------------------------------------------
# the certified inequalities
# ---------------------------------------------------------------------------


def verify_1d_inequality(trace: Trace1D, r: float, G: float, quad: int = 48):
    """Quadrature check of the per-geodesic extension inequality.

    Computes ``lhs``, the squared H1 norm of the extended trace on the
    outward ray ``(0, r)``, and ``rhs``, the certified budget
    ``164 |u'|^2 + (82 + 164 G^2/r^2) |u|^2`` over the inward ray.
    Returns ``(lhs, rhs, ratio)`` with ratio defined as 0 when both
    vanish.
    """
    cutoff = smoothstep_cutoff(G)
    breaks = [0.0, 0.5 * r, min(cutoff.t_end, 1.0) * r, r]
    s, w_s = composite_gauss(quad, sorted(set(breaks)))
    eta = cutoff.eta(s / r)
    eta_p = cutoff.eta_prime(s / r) / r
    base = -3.0 * trace.value(-s) + 4.0 * trace.value(-0.5 * s)
    e_val = base * eta
    e_der = (3.0 * trace.derivative(-s) - 2.0 * trace.derivative(-0.5 * s)) * eta \
        + base * eta_p
    lhs = float(np.sum(w_s * (e_val**2 + e_der**2)))

    t, w_t = gauss_legendre(2 * quad, -r, 0.0)
    u_sq = float(np.sum(w_t * trace.value(t) ** 2))
    du_sq = float(np.sum(w_t * trace.derivative(t) ** 2))
    rhs = 164.0 * du_sq + (82.0 + 164.0 * G * G / (r * r)) * u_sq
    ratio = 0.0 if rhs == 0.0 else lhs / rhs
    return lhs, rhs, ratio


@dataclass
class OperatorNormResult:
    max_ratio: float
    bound: float
    distortion: float
    per_sample: list

    def to_dict(self):
        return {
            "max_ratio": self.max_ratio,
            "bound": self.bound,
            "distortion": self.distortion,
            "per_sample": list(self.per_sample),
        }


def operator_norm_estimate(chart: FermiChart, cutoff: CutoffFamily,
                           sample_fields, quad: int = 64,
                           profile: ComparisonProfile | None = None):
    """Rayleigh quotients of the extension against the closed-form bound.

    For each sample field the squared H1 norm of the extension over the
    whole chart (domain plus exterior tube; the extension vanishes
    beyond) is divided by the squared H1 norm over the domain.  The
    restriction identity makes the domain part common to both.  The
    chart must be admissible; the bound is
    ``extension_norm_bound(distortion, G, r)`` with the distortion
    from the chart's comparison profile (or a supplied override).
    """
    reg = chart.regularity
    if not reg.admissible:
        raise RegularityError(f"chart is not admissible: {reg.notes}")
    data = chart.curvature_data()
    prof = profile if profile is not None else ComparisonProfile.from_curvature(data, chart.r)
    dist = distortion_factor(prof, data.n, chart.r)
    bound = extension_norm_bound(dist, cutoff.G, chart.r)

    ratios = []
    for fld in sample_fields:
        ext = ExtendedField(chart, fld, cutoff)
        l2_o, g_o = h1_norm(fld.evaluate, "omega", chart, quad, gradient=fld.partials)
        inner = l2_o + g_o
        if inner == 0.0:
            ratios.append(0.0)
            continue
        l2_t, g_t = h1_norm(ext, "tube_exterior", chart, quad,
                            s_breaks=ext.s_breakpoints)
        ratios.append((inner + l2_t + g_t) / inner)
    max_ratio = max(ratios) if ratios else 0.0
    if max_ratio > bound:
        raise RegularityError(
            f"observed ratio {max_ratio} exceeds the certified bound {bound}"
        )
    return OperatorNormResult(max_ratio=float(max_ratio), bound=float(bound),
                              distortion=float(dist), per_sample=ratios)


def c1_matching_error(chart: FermiChart, fld: ScalarField, cutoff: CutoffFamily,
                      n_probes: int = 256, step: float = 1e-4):
    """Worst mismatch of one-sided normal derivatives across the boundary.

    Second-order one-sided stencils of the extended field at depth
    ``+/- step`` along each sampled normal; for a C2 source the two
    normal derivatives agree up to O(step^2).
    """
    ext = ExtendedField(chart, fld, cutoff)
    theta = np.arange(n_probes) * (2.0 * math.pi / n_probes)
    h = step
    bpts = chart.map_unchecked(np.zeros(n_probes), theta)
    u0 = fld.evaluate(bpts)
    outer = (-3.0 * u0 + 4.0 * ext.tube_profile(np.full(n_probes, h), theta)
             - ext.tube_profile(np.full(n_probes, 2 * h), theta)) / (2 * h)
    in1 = fld.evaluate(chart.map_unchecked(np.full(n_probes, -h), theta))
    in2 = fld.evaluate(chart.map_unchecked(np.full(n_probes, -2 * h), theta))
    inner = (3.0 * u0 - 4.0 * in1 + in2) / (2 * h)
    return float(np.max(np.abs(outer - inner)))
