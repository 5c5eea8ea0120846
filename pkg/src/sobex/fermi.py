"""Domains with smooth boundary on model surfaces and their normal charts.

A :class:`DomainSpec` couples a model surface with a boundary curve
(geodesic disk, or a truncated-Fourier radial profile in the flat
chart).  A :class:`FermiChart` parametrizes the tube around the
boundary by signed normal distance ``s`` and boundary parameter
``theta`` through the map ``(s, theta) -> exp_{c(theta)}(s nu)``,
with ``s > 0`` on the outside.  The chart also evaluates the volume
element of the distance hypersurfaces through scalar normal Jacobi
fields, and :func:`check_regularity` certifies the rolling-ball,
curvature and injectivity conditions numerically.

Sign convention: ``second_fundamental`` (II) is reported with respect
to the outward normal and anchored so that the unit disk carries
``II = -1``; the outward normal spread used by the Jacobi fields is
``-II``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import comparison
from .errors import (
    FocalPointError,
    FootAmbiguityError,
    InvalidDomainError,
    OutOfTubeError,
    ParameterError,
)
from .surfaces import (
    ModelSurface,
    cartesian_to_polar,
    constant_curvature_distance,
    polar_to_cartesian,
)

__all__ = [
    "GeodesicDisk",
    "RadialProfile",
    "DomainSpec",
    "BoundarySample",
    "FermiChart",
    "RegularityReport",
    "check_regularity",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GeodesicDisk:
    """Geodesic disk of the given radius about a chart point."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0


@dataclass(frozen=True)
class RadialProfile:
    """Boundary ``rho(theta) > 0`` as a truncated Fourier series (flat chart only).

    ``rho(theta) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(k theta)
    + sum_k sin_coeffs[k-1] sin(k theta)``.
    """

    cos_coeffs: tuple = (1.0,)
    sin_coeffs: tuple = ()

    def _modes(self):
        a = np.asarray(self.cos_coeffs, dtype=float)
        b = np.asarray(self.sin_coeffs, dtype=float)
        return a, b

    def rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        a, b = self._modes()
        out = np.full_like(theta, a[0], dtype=float)
        for k in range(1, len(a)):
            out = out + a[k] * np.cos(k * theta)
        for k in range(1, len(b) + 1):
            out = out + b[k - 1] * np.sin(k * theta)
        return out

    def drho(self, theta):
        theta = np.asarray(theta, dtype=float)
        a, b = self._modes()
        out = np.zeros_like(theta, dtype=float)
        for k in range(1, len(a)):
            out = out - k * a[k] * np.sin(k * theta)
        for k in range(1, len(b) + 1):
            out = out + k * b[k - 1] * np.cos(k * theta)
        return out

    def d2rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        a, b = self._modes()
        out = np.zeros_like(theta, dtype=float)
        for k in range(1, len(a)):
            out = out - k * k * a[k] * np.cos(k * theta)
        for k in range(1, len(b) + 1):
            out = out - k * k * b[k - 1] * np.sin(k * theta)
        return out

    def squared_integral(self):
        """Exact value of ``int_0^{2pi} rho(theta)^2 dtheta``."""
        a, b = self._modes()
        return _TWO_PI * (a[0] ** 2 + 0.5 * (np.sum(a[1:] ** 2) + np.sum(b**2)))


@dataclass(frozen=True)
class DomainSpec:
    """A smooth bounded domain on a model surface with outward orientation."""

    surface: ModelSurface
    boundary: object

    def __post_init__(self):
        if isinstance(self.boundary, RadialProfile):
            if not (self.surface.kind == "constant" and self.surface.kappa == 0.0):
                raise InvalidDomainError("radial profiles live in the flat chart only")
            theta = np.linspace(0.0, _TWO_PI, 4096, endpoint=False)
            if np.any(self.boundary.rho(theta) <= 0.0):
                raise InvalidDomainError("radial profile must be positive")
        elif isinstance(self.boundary, GeodesicDisk):
            cx, cy = self.boundary.center
            off_pole = (cx != 0.0) or (cy != 0.0)
            flat = self.surface.kind == "constant" and self.surface.kappa == 0.0
            if off_pole and not flat:
                raise InvalidDomainError(
                    "geodesic disks on curved surfaces must be centred at the chart pole"
                )
            if not off_pole and not self.surface.has_pole:
                raise InvalidDomainError("surface chart has no pole to centre a disk on")
            lo, hi = self.surface.r_limits
            if not (0.0 < self.boundary.radius < hi):
                raise InvalidDomainError("disk radius outside the chart")
        else:
            raise InvalidDomainError(f"unknown boundary type {type(self.boundary).__name__}")

    # -- membership, sizes ---------------------------------------------------

    def contains(self, points):
        """Closed-domain membership test for chart points (vectorized)."""
        return self._engine().contains(points)

    def area(self):
        return self._engine().area()

    def diameter(self):
        return self._engine().diameter()

    def _engine(self):
        eng = getattr(self, "_engine_cache", None)
        if eng is None:
            eng = _make_engine(self)
            object.__setattr__(self, "_engine_cache", eng)
        return eng

    def boundary_point(self, theta):
        """Boundary data at parameter(s) ``theta``: see :class:`BoundarySample`."""
        return self._engine().boundary(np.mod(np.asarray(theta, dtype=float), _TWO_PI))


@dataclass(frozen=True)
class BoundarySample:
    """Boundary data on a parameter grid.

    ``point`` are chart coordinates, ``normal`` outward-unit chart
    components, ``second_fundamental`` the scalar II in the disk-anchored
    convention (unit disk: -1), ``spread = -II`` the outward normal
    spread rate, and ``speed`` the length of the parameter velocity
    (line element of the boundary measure).
    """

    theta: np.ndarray
    point: np.ndarray
    normal: np.ndarray
    second_fundamental: np.ndarray
    spread: np.ndarray
    speed: np.ndarray


# ---------------------------------------------------------------------------
# geometry engines
# ---------------------------------------------------------------------------


class _PoleDiskEngine:
    """Pole-centred geodesic disk on any model surface (radial normals)."""

    exact_distance = True

    def __init__(self, domain):
        self.surface = domain.surface
        self.a = float(domain.boundary.radius)
        self.f_a = float(self.surface.warp(self.a))
        self.df_a = float(self.surface.warp_prime(self.a))
        self.sigma0 = self.df_a / self.f_a
        self.symmetric = True

    def boundary(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        n = theta.shape[0]
        pts = np.stack([np.full(n, self.a), theta], axis=-1)
        normals = np.tile(np.array([1.0, 0.0]), (n, 1))
        sig = np.full(n, self.sigma0)
        return BoundarySample(theta, pts, normals, -sig, sig, np.full(n, self.f_a))

    def map(self, s, theta):
        s, theta = np.broadcast_arrays(
            np.asarray(s, dtype=float), np.asarray(theta, dtype=float)
        )
        return np.stack([self.a + s, np.mod(theta, _TWO_PI)], axis=-1)

    def invert(self, points, tol=1e-9):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        s = pts[:, 0] - self.a
        theta = np.mod(pts[:, 1], _TWO_PI)
        ok = np.ones(pts.shape[0], dtype=bool)
        amb = np.zeros(pts.shape[0], dtype=bool)
        return s, theta, ok, amb

    def ratio(self, theta, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.surface.warp(self.a + s), dtype=float) / self.f_a

    def log_ratio_slope(self, theta, s):
        s = np.asarray(s, dtype=float)
        f = np.asarray(self.surface.warp(self.a + s), dtype=float)
        return np.asarray(self.surface.warp_prime(self.a + s), dtype=float) / f

    def theta_jacobian(self, s, theta):
        """Chart components of d(map)/d(theta); here the angular unit vector."""
        s = np.asarray(s, dtype=float)
        z = np.zeros_like(s)
        return np.stack([z, np.ones_like(s)], axis=-1)

    def s_jacobian(self, s, theta):
        """Chart components of d(map)/ds; here the radial unit vector."""
        s = np.asarray(s, dtype=float)
        return np.stack([np.ones_like(s), np.zeros_like(s)], axis=-1)

    def radial_extent(self, theta):
        """Boundary radius above each angle (for domain quadrature)."""
        theta = np.asarray(theta, dtype=float)
        return np.full(theta.shape, self.a)

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, 0] <= self.a + 0.0

    def area(self):
        surf = self.surface
        if surf.kind == "constant":
            k = surf.kappa
            if k > 0.0:
                return _TWO_PI * (1.0 - math.cos(math.sqrt(k) * self.a)) / k
            if k < 0.0:
                return _TWO_PI * (math.cosh(math.sqrt(-k) * self.a) - 1.0) / (-k)
            return math.pi * self.a**2
        from scipy.integrate import quad

        val, _ = quad(lambda r: float(surf.warp(r)), 0.0, self.a, limit=200)
        return _TWO_PI * val

    def diameter(self):
        return 2.0 * self.a

    def focal_reach(self):
        """Largest s with positive Jacobi ratio on (-s, s) for all directions."""
        surf = self.surface
        lo, hi = surf.r_limits
        inward = self.a - lo
        outward = hi - self.a
        if surf.kind == "constant":
            inward = min(inward, comparison.jacobi_factor_zero(surf.kappa, -self.sigma0))
            outward = min(outward, comparison.jacobi_factor_zero(surf.kappa, self.sigma0))
        return min(inward, outward)

    def tube_curvature_range(self, r):
        return self.surface.curvature_range(self.a - r, self.a + r)

    def distance(self, p, q):
        surf = self.surface
        if surf.kind == "constant":
            return constant_curvature_distance(surf.kappa, p, q)
        return _warped_graph_distance(surf, self.a).distance(p, q)

    @property
    def distance_slack(self):
        # graph distances on warped charts carry O(mesh) metric error
        return 0.0 if self.surface.kind == "constant" else 0.1


class _FlatCurveEngine:
    """Flat chart, boundary given as a closed Cartesian curve c(theta)."""

    exact_distance = True
    distance_slack = 0.0

    def __init__(self, domain):
        self.surface = domain.surface
        self.symmetric = False
        self._dense = None

    # subclasses define: curve(theta) -> c, dc, d2c  and contains/area

    def _frame(self, theta):
        c, dc, d2c = self.curve(theta)
        speed = np.linalg.norm(dc, axis=-1)
        tangent = dc / speed[..., None]
        normal = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
        cross = dc[..., 0] * d2c[..., 1] - dc[..., 1] * d2c[..., 0]
        sigma = cross / speed**3  # signed curvature = outward spread (circle: +1/R)
        return c, normal, sigma, speed

    def boundary(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        c, normal, sigma, speed = self._frame(theta)
        return BoundarySample(
            theta, cartesian_to_polar(c), normal, -sigma, sigma, speed
        )

    def map(self, s, theta):
        s, theta = np.broadcast_arrays(
            np.asarray(s, dtype=float), np.asarray(theta, dtype=float)
        )
        c, normal, _, _ = self._frame(theta)
        return cartesian_to_polar(c + s[..., None] * normal)

    def theta_jacobian(self, s, theta):
        """d(map)/d(theta) in chart (polar) components."""
        s = np.asarray(s, dtype=float)
        theta = np.asarray(theta, dtype=float)
        c, dc, d2c = self.curve(theta)
        speed = np.linalg.norm(dc, axis=-1)
        tangent = dc / speed[..., None]
        normal = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
        dnormal = self._dnormal(theta, dc, d2c, speed, normal)
        dxy = dc + s[..., None] * dnormal
        pos = c + s[..., None] * normal
        r = np.linalg.norm(pos, axis=-1)
        e_r = pos / r[..., None]
        e_t = np.stack([-e_r[..., 1], e_r[..., 0]], axis=-1)
        dr = np.sum(dxy * e_r, axis=-1)
        dth = np.sum(dxy * e_t, axis=-1) / r
        return np.stack([dr, dth], axis=-1)

    def _dnormal(self, theta, dc, d2c, speed, normal):
        d2_rot = np.stack([d2c[..., 1], -d2c[..., 0]], axis=-1)
        proj = np.sum(d2_rot * normal, axis=-1)
        return (d2_rot - proj[..., None] * normal) / speed[..., None]

    def s_jacobian(self, s, theta):
        """Chart (polar) components of d(map)/ds = the outward normal."""
        s, theta = np.broadcast_arrays(
            np.asarray(s, dtype=float), np.asarray(theta, dtype=float)
        )
        c, normal, _, _ = self._frame(theta)
        pos = c + s[..., None] * normal
        r = np.linalg.norm(pos, axis=-1)
        e_r = pos / r[..., None]
        e_t = np.stack([-e_r[..., 1], e_r[..., 0]], axis=-1)
        dr = np.sum(normal * e_r, axis=-1)
        dth = np.sum(normal * e_t, axis=-1) / r
        return np.stack([dr, dth], axis=-1)

    def radial_extent(self, theta):
        return None

    def ratio(self, theta, s):
        _, _, sigma, _ = self._frame(np.asarray(theta, dtype=float))
        return 1.0 + sigma * np.asarray(s, dtype=float)

    def log_ratio_slope(self, theta, s):
        _, _, sigma, _ = self._frame(np.asarray(theta, dtype=float))
        return sigma / (1.0 + sigma * np.asarray(s, dtype=float))

    def _dense_table(self, n=2048):
        if self._dense is None or self._dense[0].shape[0] != n:
            theta = np.arange(n) * (_TWO_PI / n)
            c, _, _, _ = self._frame(theta)
            self._dense = (theta, c)
        return self._dense

    def invert(self, points, tol=1e-9, max_iter=60):
        pts_polar = np.atleast_2d(np.asarray(points, dtype=float))
        x = polar_to_cartesian(pts_polar)
        n_pts = x.shape[0]
        theta_tab, c_tab = self._dense_table()

        # nearest dense boundary sample initializes the Newton iteration
        theta0 = np.empty(n_pts)
        d_best = np.empty(n_pts)
        amb = np.zeros(n_pts, dtype=bool)
        chunk = 2048
        for lo in range(0, n_pts, chunk):
            hi = min(lo + chunk, n_pts)
            d2 = (
                (x[lo:hi, 0, None] - c_tab[None, :, 0]) ** 2
                + (x[lo:hi, 1, None] - c_tab[None, :, 1]) ** 2
            )
            idx = np.argmin(d2, axis=1)
            theta0[lo:hi] = theta_tab[idx]
            d_best[lo:hi] = np.sqrt(d2[np.arange(hi - lo), idx])
            amb[lo:hi] = _ambiguous_feet(d2, idx)

        theta = theta0.copy()
        c, normal, _, _ = self._frame(theta)
        s = np.sum((x - c) * normal, axis=-1)
        active = np.ones(n_pts, dtype=bool)
        scale = max(1.0, float(np.max(np.linalg.norm(x, axis=-1), initial=1.0)))
        for _ in range(max_iter):
            if not np.any(active):
                break
            th_a, s_a, x_a = theta[active], s[active], x[active]
            c, dc, d2c = self.curve(th_a)
            speed = np.linalg.norm(dc, axis=-1)
            tangent = dc / speed[..., None]
            normal = np.stack([tangent[..., 1], -tangent[..., 0]], axis=-1)
            res = c + s_a[..., None] * normal - x_a
            res_norm = np.linalg.norm(res, axis=-1)
            done = res_norm < tol * scale
            dnormal = self._dnormal(th_a, dc, d2c, speed, normal)
            j_theta = dc + s_a[..., None] * dnormal
            det = j_theta[..., 0] * normal[..., 1] - j_theta[..., 1] * normal[..., 0]
            det = np.where(np.abs(det) < 1e-300, 1e-300, det)
            dth = (-res[..., 0] * normal[..., 1] + res[..., 1] * normal[..., 0]) / det
            ds = (-j_theta[..., 0] * res[..., 1] + j_theta[..., 1] * res[..., 0]) / det
            # damped update: halve the step until the residual decreases
            step = np.ones_like(dth)
            for _damp in range(25):
                th_new = th_a + step * dth
                s_new = s_a + step * ds
                c_n, dc_n, _ = self.curve(th_new)
                sp_n = np.linalg.norm(dc_n, axis=-1)
                t_n = dc_n / sp_n[..., None]
                n_n = np.stack([t_n[..., 1], -t_n[..., 0]], axis=-1)
                res_new = np.linalg.norm(c_n + s_new[..., None] * n_n - x_a, axis=-1)
                worse = res_new > res_norm
                if not np.any(worse & ~done):
                    break
                step = np.where(worse, 0.5 * step, step)
            theta_active = np.where(done, th_a, th_a + step * dth)
            s_active = np.where(done, s_a, s_a + step * ds)
            theta[active] = theta_active
            s[active] = s_active
            still = np.zeros(n_pts, dtype=bool)
            still[active] = ~done
            active = still

        c, normal, _, _ = self._frame(theta)
        resid = np.linalg.norm(c + s[..., None] * normal - x, axis=-1)
        ok = resid < 10.0 * tol * scale
        # for ambiguous points report the conservative (dense-table) signed
        # distance, so callers can still classify them as in/out of a tube
        if np.any(amb):
            sign = np.where(self.contains(pts_polar[amb]), -1.0, 1.0)
            s = s.copy()
            s[amb] = sign * d_best[amb]
            ok = ok | amb
        return s, np.mod(theta, _TWO_PI), ok, amb

    def distance(self, p, q):
        return constant_curvature_distance(0.0, p, q)

    def focal_reach(self):
        theta = np.arange(4096) * (_TWO_PI / 4096)
        _, _, sigma, _ = self._frame(theta)
        reach = math.inf
        for sg in (np.max(sigma), np.min(sigma)):
            for direction in (sg, -sg):
                z = comparison.jacobi_factor_zero(0.0, direction)
                reach = min(reach, z)
        return reach

    def tube_curvature_range(self, r):
        return (0.0, 0.0)


def _ambiguous_feet(d2, idx, abs_tol=1e-6, separation=8):
    """Detect two almost-equally-near boundary feet from a dense distance table."""
    n = d2.shape[1]
    d = np.sqrt(d2)
    best = d[np.arange(d.shape[0]), idx]
    offs = (np.arange(n)[None, :] - idx[:, None]) % n
    far = (offs > separation) & (offs < n - separation)
    d_far = np.where(far, d, np.inf)
    # a competing near-minimum angularly separated from the best foot
    runner = np.min(d_far, axis=1)
    return runner <= best + abs_tol


class _FlatCircleEngine(_FlatCurveEngine):
    """Circle of radius ``a`` about an arbitrary flat-chart centre."""

    def __init__(self, domain):
        super().__init__(domain)
        self.a = float(domain.boundary.radius)
        # the centre is a chart (polar) point like everything else
        self.c0 = polar_to_cartesian(np.asarray(domain.boundary.center, dtype=float))
        self.symmetric = True

    def curve(self, theta):
        theta = np.asarray(theta, dtype=float)
        e = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        de = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        c = self.c0 + self.a * e
        return c, self.a * de, -self.a * e

    def invert(self, points, tol=1e-9):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x = polar_to_cartesian(pts) - self.c0
        rr = np.linalg.norm(x, axis=-1)
        s = rr - self.a
        theta = np.mod(np.arctan2(x[:, 1], x[:, 0]), _TWO_PI)
        ok = rr > 1e-14
        amb = ~ok
        return s, theta, ok, amb

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        x = polar_to_cartesian(pts) - self.c0
        return np.linalg.norm(x, axis=-1) <= self.a

    def area(self):
        return math.pi * self.a**2

    def diameter(self):
        return 2.0 * self.a


class _FlatFourierEngine(_FlatCurveEngine):
    """Flat-chart boundary from a truncated Fourier radial profile."""

    def __init__(self, domain):
        super().__init__(domain)
        self.profile = domain.boundary

    def curve(self, theta):
        theta = np.asarray(theta, dtype=float)
        rho = self.profile.rho(theta)
        dr = self.profile.drho(theta)
        d2r = self.profile.d2rho(theta)
        ct, st = np.cos(theta), np.sin(theta)
        e = np.stack([ct, st], axis=-1)
        de = np.stack([-st, ct], axis=-1)
        c = rho[..., None] * e
        dc = dr[..., None] * e + rho[..., None] * de
        d2c = (d2r - rho)[..., None] * e + 2.0 * dr[..., None] * de
        return c, dc, d2c

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts[:, 0] <= self.profile.rho(pts[:, 1])

    def radial_extent(self, theta):
        return self.profile.rho(np.asarray(theta, dtype=float))

    def area(self):
        return 0.5 * self.profile.squared_integral()

    def diameter(self):
        theta = np.arange(2048) * (_TWO_PI / 2048)
        c, _, _ = self.curve(theta)
        # the diameter of a compact planar set is attained on the boundary
        best = 0.0
        chunk = 256
        for lo in range(0, 2048, chunk):
            d = np.linalg.norm(c[lo : lo + chunk, None, :] - c[None, :, :], axis=-1)
            best = max(best, float(np.max(d)))
        return best


class _WarpedGraphMetric:
    """Dijkstra distances on a fine polar grid, for warped-surface charts."""

    def __init__(self, surface, r_max, n_r=192, n_t=384):
        from scipy.sparse import coo_matrix
        from scipy.sparse.csgraph import dijkstra

        self.surface = surface
        self.n_r, self.n_t = n_r, n_t
        self.dr = r_max * 1.0 / n_r
        self.dt = _TWO_PI / n_t
        self.r = (np.arange(n_r) + 0.5) * self.dr
        rows, cols, lens = [], [], []

        def node(i, j):
            return i * n_t + (j % n_t)

        f_mid = np.asarray(surface.warp(self.r + 0.5 * self.dr), dtype=float)
        f_at = np.asarray(surface.warp(self.r), dtype=float)
        i_idx = np.repeat(np.arange(n_r), n_t)
        j_idx = np.tile(np.arange(n_t), n_r)
        # angular edges
        rows.append(node(i_idx, j_idx))
        cols.append(node(i_idx, j_idx + 1))
        lens.append(f_at[i_idx] * self.dt)
        # radial edges
        mask = i_idx < n_r - 1
        rows.append(node(i_idx[mask], j_idx[mask]))
        cols.append(node(i_idx[mask] + 1, j_idx[mask]))
        lens.append(np.full(mask.sum(), self.dr))
        # diagonal edges (both orientations)
        for dj in (1, -1):
            rows.append(node(i_idx[mask], j_idx[mask]))
            cols.append(node(i_idx[mask] + 1, j_idx[mask] + dj))
            lens.append(np.hypot(self.dr, f_mid[i_idx[mask]] * self.dt))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        lens = np.concatenate(lens)
        n = n_r * n_t
        g = coo_matrix((lens, (rows, cols)), shape=(n, n))
        self._graph = (g + g.T).tocsr()
        self._dijkstra = dijkstra

    def _snap(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        i = np.clip(np.round(pts[:, 0] / self.dr - 0.5).astype(int), 0, self.n_r - 1)
        j = np.mod(np.round(pts[:, 1] / self.dt).astype(int), self.n_t)
        return i * self.n_t + j

    def distance(self, p, q):
        P, Q = np.broadcast_arrays(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
        shape = P.shape[:-1]
        pi = self._snap(P)
        qi = self._snap(Q)
        sources = np.unique(pi)
        dist = self._dijkstra(self._graph, directed=False, indices=sources)
        lookup = {s: k for k, s in enumerate(sources)}
        rows = np.array([lookup[s] for s in pi])
        out = dist[rows, qi].reshape(shape)
        return float(out) if out.ndim == 0 else out


_warped_graphs = {}


def _warped_graph_distance(surface, a):
    key = (id(surface), round(a, 12))
    if key not in _warped_graphs:
        lo, hi = surface.r_limits
        r_max = min(hi * 0.98 if math.isfinite(hi) else 4.0 * a, 4.0 * a)
        _warped_graphs[key] = _WarpedGraphMetric(surface, r_max)
    return _warped_graphs[key]


def _make_engine(domain: DomainSpec):
    b = domain.boundary
    if isinstance(b, RadialProfile):
        return _FlatFourierEngine(domain)
    flat = domain.surface.kind == "constant" and domain.surface.kappa == 0.0
    if isinstance(b, GeodesicDisk):
        cx, cy = b.center
        if flat and (cx != 0.0 or cy != 0.0):
            return _FlatCircleEngine(domain)
        return _PoleDiskEngine(domain)
    raise InvalidDomainError("unsupported boundary type")


# ---------------------------------------------------------------------------
# the chart
# ---------------------------------------------------------------------------


class FermiChart:
    """Signed-normal-distance parametrization of a boundary tube.

    Immutable after construction; all queries are vectorized and safe
    for concurrent use.  ``r`` must stay below the focal reach of the
    boundary (first vanishing of a normal Jacobi field in either
    direction), which is verified at build time.
    """

    def __init__(self, domain: DomainSpec, r: float, n_theta: int = 256):
        if r <= 0.0:
            raise ParameterError("tube radius must be positive")
        self.domain = domain
        self.r = float(r)
        self.n_theta = int(n_theta)
        self.engine = domain._engine()
        reach = self.engine.focal_reach()
        if self.r >= reach:
            raise FocalPointError(
                f"tube radius {r} reaches a focal point (reach {reach:.6g})"
            )
        theta = np.arange(self.n_theta) * (_TWO_PI / self.n_theta)
        self.samples = self.engine.boundary(theta)
        self._quad_cache = {}
        self._regularity = None

    # -- basic queries -------------------------------------------------------

    @property
    def surface(self):
        return self.domain.surface

    def boundary_point(self, theta):
        return self.engine.boundary(np.mod(np.asarray(theta, dtype=float), _TWO_PI))

    def fermi_map(self, s, theta):
        """Chart point at signed depth ``s`` along the normal from ``theta``.

        ``s > 0`` lands outside the domain, ``s < 0`` inside.  Raises
        :class:`OutOfTubeError` when ``|s| >= r``.
        """
        s_arr = np.asarray(s, dtype=float)
        if np.any(np.abs(s_arr) >= self.r):
            raise OutOfTubeError(f"|s| must stay below the tube radius {self.r}")
        return self.engine.map(s_arr, np.asarray(theta, dtype=float))

    def map_unchecked(self, s, theta):
        """Like :meth:`fermi_map` without the tube-radius guard (internal uses)."""
        return self.engine.map(np.asarray(s, dtype=float), np.asarray(theta, dtype=float))

    def fermi_invert(self, points, tol: float = 1e-9):
        """Signed distance and foot parameter of tube points.

        Raises :class:`OutOfTubeError` for points outside the open tube
        and :class:`FootAmbiguityError` when two boundary feet are
        within tolerance of being equally close (a regularity
        violation).
        """
        s, theta, ok, amb = self.engine.invert(points, tol=tol)
        if np.any(amb):
            raise FootAmbiguityError("two boundary feet are equally close")
        if np.any(~ok):
            raise OutOfTubeError("foot-point iteration failed to converge")
        if np.any(np.abs(s) >= self.r):
            raise OutOfTubeError("point outside the tubular neighborhood")
        if np.ndim(points) == 1:
            return float(s[0]), float(theta[0])
        return s, theta

    def invert_soft(self, points, tol: float = 1e-9):
        """Batch inversion returning masks instead of raising (internal)."""
        return self.engine.invert(points, tol=tol)

    def volume_element_ratio(self, theta, s):
        """dvol_s / dvol_0 along the normal geodesic at ``theta``.

        Computed from the scalar normal Jacobi field with unit initial
        value and initial slope equal to the outward spread ``-II``.
        Raises :class:`FocalPointError` if the field vanishes.
        """
        s_arr = np.asarray(s, dtype=float)
        if np.any(np.abs(s_arr) >= self.r):
            raise OutOfTubeError("depth outside the tube")
        out = self.engine.ratio(np.asarray(theta, dtype=float), s_arr)
        if np.any(np.asarray(out) <= 0.0):
            raise FocalPointError("normal Jacobi field vanished inside the tube")
        return float(out) if np.ndim(out) == 0 else out

    def log_ratio_slope(self, theta, s):
        """d/ds log(volume ratio): mean curvature of the distance hypersurface."""
        return self.engine.log_ratio_slope(np.asarray(theta, dtype=float),
                                           np.asarray(s, dtype=float))

    # -- derived data ----------------------------------------------------------

    def curvature_data(self) -> comparison.CurvatureData:
        """Tube curvature bounds measured from the chart samples."""
        k_lo, k_up = self.engine.tube_curvature_range(self.r)
        ii = self.samples.second_fundamental
        return comparison.CurvatureData(
            k_lower=k_lo,
            K_upper=k_up,
            H_min=float(np.min(ii)),
            H_max=float(np.max(ii)),
            n=self.surface.dimension,
        )

    def comparison_profile(self) -> comparison.ComparisonProfile:
        return comparison.ComparisonProfile.from_curvature(self.curvature_data(), self.r)

    @property
    def regularity(self):
        if self._regularity is None:
            self._regularity = check_regularity(self.domain, self.r,
                                                n_theta=self.n_theta)
        return self._regularity


# ---------------------------------------------------------------------------
# regularity certification
# ---------------------------------------------------------------------------


@dataclass
class RegularityReport:
    """Sampled certificate of the rolling-ball and chart conditions.

    Margins are the worst sampled signed-distance violations (zero up
    to grid resolution when the corresponding condition holds with
    tangency); they certify the conditions only up to the sampling
    resolution recorded in ``n_theta``/``n_dense``.
    """

    admissible: bool
    interior_ball_ok: bool
    exterior_ball_ok: bool
    injectivity_ok: bool
    radius_ok: bool
    H: float
    K: float
    r0: float
    r: float
    interior_margin: float
    exterior_margin: float
    roundtrip_error: float
    ambiguous_points: int
    n_theta: int
    n_dense: int
    notes: list = dc_field(default_factory=list)

    def to_dict(self):
        return {
            "admissible": self.admissible,
            "interior_ball_ok": self.interior_ball_ok,
            "exterior_ball_ok": self.exterior_ball_ok,
            "injectivity_ok": self.injectivity_ok,
            "radius_ok": self.radius_ok,
            "H": self.H,
            "K": self.K,
            "r0": self.r0,
            "r": self.r,
            "interior_margin": self.interior_margin,
            "exterior_margin": self.exterior_margin,
            "roundtrip_error": self.roundtrip_error,
            "ambiguous_points": self.ambiguous_points,
            "n_theta": self.n_theta,
            "n_dense": self.n_dense,
            "notes": list(self.notes),
        }


def check_regularity(domain: DomainSpec, r: float, n_theta: int = 256,
                     n_dense: int = 512) -> RegularityReport:
    """Certify the rolling-ball, curvature and injectivity conditions.

    Never raises for geometric failures; the report carries them.  The
    interior (exterior) check places a ball centre at depth ``-r``
    (``+r``) on each sampled normal and verifies by dense boundary
    sampling that the ball stays inside (outside) with tangency only at
    the foot point; the margin records the worst violation.  ``H`` is
    the smallest bound with II >= -H for both normals, ``K`` the
    largest ``|Sec|`` seen in the tube, and ``r0`` the focal radius for
    those worst-case bounds.
    """
    notes = []
    engine = domain._engine()
    theta = np.arange(n_theta) * (_TWO_PI / n_theta)
    bnd = engine.boundary(theta)
    sigma = bnd.spread
    H = float(np.max(np.abs(sigma)))
    k_lo, k_up = engine.tube_curvature_range(r)
    K = float(max(abs(k_lo), abs(k_up)))
    r0 = comparison.focal_radius(K, H)
    radius_ok = r <= r0 + 1e-12

    reach = engine.focal_reach()
    chart_ok = r < reach
    if not chart_ok:
        notes.append(f"tube radius reaches a focal point (reach {reach:.6g})")

    slack = getattr(engine, "distance_slack", 0.0)
    tol = max(1e-9 * (1.0 + r), slack * r)

    centers_theta = theta if not engine.symmetric else theta[:1]
    dense_theta = np.arange(n_dense) * (_TWO_PI / n_dense)
    dense_pts = engine.boundary(dense_theta).point

    interior_margin = math.inf
    exterior_margin = math.inf
    interior_ok = True
    exterior_ok = True
    if chart_ok:
        for sign in (-1.0, +1.0):
            centers = engine.map(np.full(centers_theta.shape, sign * r), centers_theta)
            inside = engine.contains(centers)
            side_ok = bool(np.all(inside)) if sign < 0 else bool(not np.any(inside))
            margin = math.inf
            chunk = 64
            for lo in range(0, centers.shape[0], chunk):
                block = centers[lo : lo + chunk]
                d = engine.distance(block[:, None, :], dense_pts[None, :, :])
                margin = min(margin, float(np.min(d) - r))
            side_ok = side_ok and margin >= -tol
            if sign < 0:
                interior_ok, interior_margin = side_ok, margin
            else:
                exterior_ok, exterior_margin = side_ok, margin
    else:
        interior_ok = exterior_ok = False
        interior_margin = exterior_margin = -math.inf

    # injectivity: round-trip of the parametrization over a tube grid
    roundtrip = 0.0
    ambiguous = 0
    injective = chart_ok
    if chart_ok:
        s_grid = np.linspace(-0.95 * r, 0.95 * r, 9)
        th_grid = theta[:: max(1, n_theta // 64)]
        S, T = np.meshgrid(s_grid, th_grid, indexing="ij")
        pts = engine.map(S.ravel(), T.ravel())
        s_back, th_back, ok, amb = engine.invert(pts)
        ambiguous = int(np.count_nonzero(amb))
        if not np.all(ok):
            injective = False
            notes.append("foot-point inversion failed on the tube grid")
        if ambiguous:
            injective = False
            notes.append("ambiguous boundary feet detected (tube self-overlap)")
        dth = np.abs(np.angle(np.exp(1j * (th_back - T.ravel()))))
        err = np.maximum(np.abs(s_back - S.ravel()), dth * float(np.max(bnd.speed)))
        roundtrip = float(np.max(err[ok])) if np.any(ok) else math.inf
        if roundtrip > 1e-8 * max(1.0, r):
            injective = False
            notes.append("round-trip error above tolerance")

    admissible = bool(interior_ok and exterior_ok and injective and radius_ok and chart_ok)
    return RegularityReport(
        admissible=admissible,
        interior_ball_ok=bool(interior_ok),
        exterior_ball_ok=bool(exterior_ok),
        injectivity_ok=bool(injective),
        radius_ok=bool(radius_ok),
        H=H,
        K=K,
        r0=float(r0),
        r=float(r),
        interior_margin=float(interior_margin),
        exterior_margin=float(exterior_margin),
        roundtrip_error=float(roundtrip),
        ambiguous_points=ambiguous,
        n_theta=int(n_theta),
        n_dense=int(n_dense),
        notes=notes,
    )
