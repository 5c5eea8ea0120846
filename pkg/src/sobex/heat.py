"""Discrete Neumann heat engine: spectra, kernels and bound diagnostics.

The module discretizes bounded domains (an interval, or a disk-like
domain on a model surface) into symmetric positive semidefinite
Neumann stiffness operators with diagonal mass, computes eigenpairs
and the heat kernel

    h_t(x, y) = sum_k exp(-lambda_k t) phi_k(x) phi_k(y),

and measures the quantities appearing in the localized heat-kernel
theory: the diagonal product ``h_t(x,x) Vol(B(x, sqrt(t)))``, volume
doubling constants, localized Gagliardo-Nirenberg constants, weighted
semigroup operator norms with their Dunford-Pettis identities,
integral curvature means, the Kato quantity, the first nonzero
eigenvalue scaling and the inverse-time gradient (Li-Yau style)
envelope for positive solutions.

Balls are ambient metric balls intersected with the domain: volumes
sum node weights over nodes within the closed-form (or graph) distance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad as _quad1d
from scipy.optimize import linprog

from .errors import AssemblyError, ParameterError
from .fermi import DomainSpec, GeodesicDisk, RadialProfile
from .surfaces import constant_curvature_distance, polar_to_cartesian

__all__ = [
    "DiscreteDomain",
    "NeumannSystem",
    "assemble",
    "heat_kernel",
    "CurvatureField",
    "curvature_field",
    "DiagonalBoundResult",
    "diagonal_bound_check",
    "doubling_constant",
    "doubling_comparability",
    "GNResult",
    "gn_check",
    "vev_norm",
    "vev_finiteness_sweep",
    "integral_ricci",
    "kato_quantity",
    "eigenvalue_diagnostic",
    "LiYauResult",
    "li_yau_check",
    "fit_inverse_time_envelope",
]

_TWO_PI = 2.0 * math.pi
_LOG_TRUNC = -math.log(1e-12)  # spectral truncation threshold
_MODE_CAP = 2000


# ---------------------------------------------------------------------------
# discrete domains
# ---------------------------------------------------------------------------


class DiscreteDomain:
    """Nodes, quadrature masses and metric data of a discretized domain.

    Use the constructors :meth:`interval` and :meth:`disk_like`.  Node
    weights are exact integrals of the area element over a cell
    tiling, so they sum to the domain volume to machine precision.
    """

    def __init__(self):
        self.kind = None
        self.nodes = None          # (N,) for interval, (N, 2) chart coords else
        self.weights = None
        self.n = None              # homogeneous dimension for doubling exponents
        self.spec = None           # DomainSpec for disk-like domains
        self.mesh_width = None
        self._cart = None
        self._graph = None
        self._params = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def interval(cls, L, N):
        if N < 16:
            raise AssemblyError("need at least 16 cells on the interval")
        dom = cls()
        dom.kind = "interval"
        h = float(L) / int(N)
        dom.nodes = (np.arange(N) + 0.5) * h
        dom.weights = np.full(N, h)
        dom.n = 1
        dom.mesh_width = h
        dom._params = ("interval", float(L), int(N))
        dom._L = float(L)
        return dom

    @classmethod
    def disk_like(cls, spec: DomainSpec, n_r, n_theta):
        if n_r < 16 or n_theta < 16:
            raise AssemblyError("need at least 16 cells per axis")
        dom = cls()
        dom.spec = spec
        dom.n = 2
        dom._params = ("disk_like", spec, int(n_r), int(n_theta))
        if isinstance(spec.boundary, RadialProfile):
            dom._build_blob(spec, int(n_r), int(n_theta))
        elif isinstance(spec.boundary, GeodesicDisk):
            cx, cy = spec.boundary.center
            if cx != 0.0 or cy != 0.0:
                raise AssemblyError("disk-like grids need a pole-centred disk")
            dom._build_pole_disk(spec, int(n_r), int(n_theta))
        else:
            raise AssemblyError("unsupported boundary for disk-like grids")
        return dom

    def refine(self):
        """The same domain at doubled resolution (for stability studies)."""
        if self._params[0] == "interval":
            _, L, N = self._params
            return DiscreteDomain.interval(L, 2 * N)
        _, spec, n_r, n_t = self._params
        return DiscreteDomain.disk_like(spec, 2 * n_r, 2 * n_t)

    # -- grid builders ---------------------------------------------------------

    def _build_pole_disk(self, spec, n_r, n_t):
        surf = spec.surface
        a = float(spec.boundary.radius)
        dr = a / n_r
        dt = _TWO_PI / n_t
        r_edges = np.arange(n_r + 1) * dr
        r_cent = (np.arange(n_r) + 0.5) * dr
        theta = (np.arange(n_t) + 0.5) * dt

        cell_r = _warp_integral(surf, r_edges)          # per radial cell
        w = np.repeat(cell_r * dt, n_t)
        R, T = np.meshgrid(r_cent, theta, indexing="ij")
        self.kind = "pole_disk"
        self.nodes = np.stack([R.ravel(), T.ravel()], axis=-1)
        self.weights = w
        f_cent = np.asarray(surf.warp(r_cent), dtype=float)
        self.mesh_width = max(dr, float(np.max(f_cent)) * dt)
        self._grid = (n_r, n_t, dr, dt, r_cent, r_edges, theta)

    def _build_blob(self, spec, n_r, n_t):
        prof = spec.boundary
        dxi = 1.0 / n_r
        dt = _TWO_PI / n_t
        theta = np.arange(n_t) * dt
        rho = prof.rho(theta)
        xi = (np.arange(n_r) + 1) * dxi                 # rings 1..n_r, ring n_r on the boundary
        # vertices: pole + rings
        ring_pts = (xi[:, None, None] * rho[None, :, None]) \
            * np.stack([np.cos(theta), np.sin(theta)], axis=-1)[None, :, :]
        cart = np.vstack([np.zeros((1, 2)), ring_pts.reshape(-1, 2)])
        self.kind = "blob"
        self._cart = cart
        r = np.linalg.norm(cart, axis=-1)
        th = np.mod(np.arctan2(cart[:, 1], cart[:, 0]), _TWO_PI)
        self.nodes = np.stack([r, th], axis=-1)

        # exact dual-cell masses in (xi, theta): the cells tile the blob
        theta_edges = (np.arange(n_t + 1) - 0.5) * dt
        rho_sq_cell = np.empty(n_t)
        gx, gw = np.polynomial.legendre.leggauss(16)
        for j in range(n_t):
            mid = 0.5 * (theta_edges[j] + theta_edges[j + 1])
            half = 0.5 * dt
            rho_sq_cell[j] = half * np.sum(gw * prof.rho(mid + half * gx) ** 2)
        xi_lo = np.maximum(xi - 0.5 * dxi, 0.0)
        xi_hi = np.minimum(xi + 0.5 * dxi, 1.0)
        ring_frac = 0.5 * (xi_hi**2 - xi_lo**2)         # (n_r,)
        w = np.empty(cart.shape[0])
        w[0] = 0.5 * (0.5 * dxi) ** 2 * np.sum(rho_sq_cell)
        w[1:] = (ring_frac[:, None] * rho_sq_cell[None, :]).ravel()
        self.weights = w
        self.mesh_width = max(float(np.max(rho)) * dxi, float(np.max(rho)) * dt)
        self._grid = (n_r, n_t, dxi, dt, xi, theta, rho)
        self._triangles = self._triangulate(n_r, n_t)

    @staticmethod
    def _triangulate(n_r, n_t):
        def vid(i, j):  # ring i >= 1
            return 1 + (i - 1) * n_t + (j % n_t)

        tris = []
        j = np.arange(n_t)
        tris.append(np.stack([np.zeros(n_t, dtype=int), vid(1, j), vid(1, j + 1)], axis=-1))
        for i in range(1, n_r):
            tris.append(np.stack([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)], axis=-1))
            tris.append(np.stack([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)], axis=-1))
        return np.vstack(tris)

    # -- sizes and metric ------------------------------------------------------

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def volume(self):
        return float(np.sum(self.weights))

    def diameter(self):
        if self.kind == "interval":
            return self._L
        if self.kind == "pole_disk":
            return 2.0 * float(self.spec.boundary.radius)
        return self.spec.diameter()

    def cartesian(self):
        if self._cart is None:
            self._cart = polar_to_cartesian(self.nodes)
        return self._cart

    def distance_rows(self, idx):
        """Distances from the nodes ``idx`` to all nodes, shape (len(idx), N)."""
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        if self.kind == "interval":
            return np.abs(self.nodes[idx][:, None] - self.nodes[None, :])
        surf = self.spec.surface
        if surf.kind == "constant":
            if surf.kappa == 0.0:
                c = self.cartesian()
                return np.linalg.norm(c[idx][:, None, :] - c[None, :, :], axis=-1)
            return constant_curvature_distance(
                surf.kappa, self.nodes[idx][:, None, :], self.nodes[None, :, :]
            )
        return self._graph_distance_rows(idx)

    def _graph_distance_rows(self, idx):
        from scipy.sparse.csgraph import dijkstra

        if self._graph is None:
            n_r, n_t, dr, dt, r_cent, _, _ = self._grid
            surf = self.spec.surface
            f = np.asarray(surf.warp(r_cent), dtype=float)
            f_mid = np.asarray(surf.warp(r_cent[:-1] + 0.5 * dr), dtype=float)
            rows, cols, lens = [], [], []

            def node(i, j):
                return i * n_t + (j % n_t)

            i_idx = np.repeat(np.arange(n_r), n_t)
            j_idx = np.tile(np.arange(n_t), n_r)
            rows.append(node(i_idx, j_idx)); cols.append(node(i_idx, j_idx + 1))
            lens.append(f[i_idx] * dt)
            m = i_idx < n_r - 1
            rows.append(node(i_idx[m], j_idx[m])); cols.append(node(i_idx[m] + 1, j_idx[m]))
            lens.append(np.full(m.sum(), dr))
            for dj in (1, -1):
                rows.append(node(i_idx[m], j_idx[m]))
                cols.append(node(i_idx[m] + 1, j_idx[m] + dj))
                lens.append(np.hypot(dr, f_mid[i_idx[m]] * dt))
            # across the pole: opposite cells of the first ring
            j0 = np.arange(n_t)
            rows.append(node(np.zeros(n_t, dtype=int), j0))
            cols.append(node(np.zeros(n_t, dtype=int), j0 + n_t // 2))
            lens.append(np.full(n_t, 2.0 * r_cent[0]))
            g = sp.coo_matrix(
                (np.concatenate(lens), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.size, self.size),
            )
            self._graph = (g + g.T).tocsr()
        return dijkstra(self._graph, directed=False, indices=np.atleast_1d(idx))

    def ball_volumes(self, idx, radius):
        """Vol(domain intersected with B(node, radius)) for each node index."""
        d = self.distance_rows(idx)
        return (d < float(radius)) @ self.weights

    def sample_indices(self, count):
        """A deterministic spread of node indices (for sup-type sweeps)."""
        N = self.size
        if count >= N:
            return np.arange(N)
        return np.unique(np.linspace(0, N - 1, count).astype(int))

    def interior_mask(self, depth=2.0):
        """Nodes at least ``depth`` mesh widths away from the boundary."""
        if self.kind == "interval":
            x = self.nodes
            pad = depth * self.mesh_width
            return (x > pad) & (x < self._L - pad)
        if self.kind == "pole_disk":
            n_r, n_t, dr, *_ = self._grid
            i = np.repeat(np.arange(n_r), n_t)
            return i < n_r - int(math.ceil(depth))
        n_r, n_t, dxi, *_ = self._grid
        ring = np.concatenate([[0], np.repeat(np.arange(1, n_r + 1), n_t)])
        return ring <= n_r - int(math.ceil(depth))

    def node_gradient(self, values):
        """Orthonormal-frame gradient components at the nodes, shape (N, dim)."""
        v = np.asarray(values, dtype=float)
        if self.kind == "interval":
            h = self.mesh_width
            out = np.gradient(v, h)
            return out[:, None]
        if self.kind == "pole_disk":
            n_r, n_t, dr, dt, r_cent, _, _ = self._grid
            f = np.asarray(self.spec.surface.warp(r_cent), dtype=float)
            V = v.reshape(n_r, n_t)
            d_r = np.gradient(V, dr, axis=0)
            d_t = (np.roll(V, -1, axis=1) - np.roll(V, 1, axis=1)) / (2.0 * dt)
            d_t = d_t / f[:, None]
            return np.stack([d_r.ravel(), d_t.ravel()], axis=-1)
        return self._blob_gradient(v)

    def _blob_gradient(self, v):
        cart = self.cartesian()
        tris = self._triangles
        p0, p1, p2 = cart[tris[:, 0]], cart[tris[:, 1]], cart[tris[:, 2]]
        e0, e1, e2 = p2 - p1, p0 - p2, p1 - p0
        area2 = e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0])
        # P1 gradient: sum_i v_i * rot(e_i) / (2 A)
        rot = lambda e: np.stack([-e[:, 1], e[:, 0]], axis=-1)
        g = (
            v[tris[:, 0], None] * rot(e0)
            + v[tris[:, 1], None] * rot(e1)
            + v[tris[:, 2], None] * rot(e2)
        ) / area2[:, None]
        acc = np.zeros((self.size, 2))
        wacc = np.zeros(self.size)
        a = 0.5 * np.abs(area2)
        for k in range(3):
            np.add.at(acc, tris[:, k], g * a[:, None])
            np.add.at(wacc, tris[:, k], a)
        return acc / wacc[:, None]


def _warp_integral(surface, r_edges):
    """Exact per-cell integrals of the warp factor (cell masses / dtheta)."""
    k = surface.kappa if surface.kind == "constant" else None
    if surface.kind == "constant":
        if k > 0.0:
            anti = -np.cos(math.sqrt(k) * r_edges) / k
        elif k < 0.0:
            anti = np.cosh(math.sqrt(-k) * r_edges) / (-k)
        else:
            anti = 0.5 * r_edges**2
        return np.diff(anti)
    gx, gw = np.polynomial.legendre.leggauss(8)
    lo, hi = r_edges[:-1], r_edges[1:]
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    vals = np.asarray(surface.warp(mid + half * gx[None, :]), dtype=float)
    return (half[:, 0]) * (vals @ gw)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def assemble(domain: DiscreteDomain) -> "NeumannSystem":
    """Symmetric PSD Neumann stiffness with diagonal mass for a domain.

    The natural (no-flux) boundary treatment makes constants exact null
    vectors: ``stiffness @ 1 == 0``.  Interval and pole-centred disks
    use two-point flux edge weights on the orthogonal grid; flat
    Fourier blobs use cotangent edge weights on the triangulated grid
    (both are the same graph-Laplacian construction with metric-aware
    edge conductances).
    """
    if np.any(domain.weights <= 0.0) or not np.all(np.isfinite(domain.weights)):
        raise AssemblyError("degenerate node weights")
    if domain.kind == "interval":
        N = domain.size
        h = domain.mesh_width
        cond = np.full(N - 1, 1.0 / h)
        A = _edge_laplacian(np.arange(N - 1), np.arange(1, N), cond, N)
    elif domain.kind == "pole_disk":
        n_r, n_t, dr, dt, r_cent, r_edges, _ = domain._grid
        surf = domain.spec.surface

        def node(i, j):
            return i * n_t + (j % n_t)

        i_idx = np.repeat(np.arange(n_r), n_t)
        j_idx = np.tile(np.arange(n_t), n_r)
        f_cent = np.asarray(surf.warp(r_cent), dtype=float)
        f_edge = np.asarray(surf.warp(r_edges[1:-1]), dtype=float)
        rows, cols, vals = [], [], []
        rows.append(node(i_idx, j_idx)); cols.append(node(i_idx, j_idx + 1))
        vals.append(dr / (f_cent[i_idx] * dt))
        m = i_idx < n_r - 1
        rows.append(node(i_idx[m], j_idx[m])); cols.append(node(i_idx[m] + 1, j_idx[m]))
        vals.append(f_edge[i_idx[m]] * dt / dr)
        A = _edge_laplacian(
            np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
            domain.size,
        )
    elif domain.kind == "blob":
        cart = domain.cartesian()
        tris = domain._triangles
        p0, p1, p2 = cart[tris[:, 0]], cart[tris[:, 1]], cart[tris[:, 2]]
        e0, e1, e2 = p2 - p1, p0 - p2, p1 - p0
        area2 = e2[:, 0] * (-e1[:, 1]) - e2[:, 1] * (-e1[:, 0])
        a4 = 2.0 * area2
        # cotangent edge weights, assembled per triangle
        w01 = -np.sum(e0 * e1, axis=-1) / a4   # cot at vertex 2 -> edge (0,1)
        w12 = -np.sum(e1 * e2, axis=-1) / a4   # cot at vertex 0 -> edge (1,2)
        w20 = -np.sum(e2 * e0, axis=-1) / a4   # cot at vertex 1 -> edge (2,0)
        rows = np.concatenate([tris[:, 0], tris[:, 1], tris[:, 2]])
        cols = np.concatenate([tris[:, 1], tris[:, 2], tris[:, 0]])
        vals = np.concatenate([w01, w12, w20])
        A = _edge_laplacian(rows, cols, vals, domain.size)
    else:
        raise AssemblyError(f"unknown domain kind {domain.kind!r}")
    return NeumannSystem(A, domain.weights, domain)


def _edge_laplacian(rows, cols, cond, N):
    off = sp.coo_matrix((cond, (rows, cols)), shape=(N, N))
    off = off + off.T
    deg = np.asarray(off.sum(axis=1)).ravel()
    return (sp.diags(deg) - off).tocsr()


# ---------------------------------------------------------------------------
# the spectral system
# ---------------------------------------------------------------------------


class NeumannSystem:
    """Stiffness + diagonal mass with cached eigenpairs and kernel tools.

    Eigenpairs are mass-orthonormal; the first eigenvalue is zero with
    the constant eigenvector.  Dense solves are used up to
    ``DENSE_LIMIT`` unknowns, Lanczos beyond.
    """

    DENSE_LIMIT = 4800

    def __init__(self, stiffness, mass, domain=None):
        self.stiffness = stiffness.tocsr()
        self.mass = np.asarray(mass, dtype=float)
        self.domain = domain
        self._lam = None
        self._phi = None
        # iterative eigensolves are impractical beyond a few hundred modes
        self.mode_cap = _MODE_CAP if self.size <= self.DENSE_LIMIT else 384

    @property
    def size(self):
        return self.mass.shape[0]

    @property
    def volume(self):
        return float(np.sum(self.mass))

    def energy(self, f):
        """Dirichlet energy ``f^T A f`` (the squared half-Laplacian norm)."""
        f = np.asarray(f, dtype=float)
        # clamp roundoff-negative values for near-constant inputs
        return max(0.0, float(f @ (self.stiffness @ f)))

    # -- eigensolves -----------------------------------------------------------

    def eigenpairs(self, count):
        """First ``count`` mass-orthonormal eigenpairs (ascending)."""
        count = int(min(count, self.size if self.size <= self.DENSE_LIMIT
                        else self.size - 2))
        if self._lam is not None and self._lam.shape[0] >= count:
            return self._lam[:count], self._phi[:, :count]
        d = 1.0 / np.sqrt(self.mass)
        if self.size <= self.DENSE_LIMIT:
            from scipy.linalg import eigh

            B = (self.stiffness.multiply(d[:, None]).multiply(d[None, :])).toarray()
            B = 0.5 * (B + B.T)
            lam, Y = eigh(B)
            lam = np.maximum(lam, 0.0)
            keep = max(count, min(self.size, _MODE_CAP))
            lam, phi = lam[:keep], d[:, None] * Y[:, :keep]
        else:
            from scipy.sparse.linalg import eigsh

            B = self.stiffness.multiply(d[:, None]).multiply(d[None, :]).tocsc()
            # deterministic start vector: ARPACK would otherwise randomize
            v0 = np.cos(np.arange(self.size, dtype=float))
            lam, Y = eigsh(B, k=count, sigma=-1e-8, which="LM", v0=v0)
            order = np.argsort(lam)
            lam = np.maximum(lam[order], 0.0)
            phi = d[:, None] * Y[:, order]
        # canonical sign: the largest-magnitude entry of each mode is positive
        peak = np.argmax(np.abs(phi), axis=0)
        flip = phi[peak, np.arange(phi.shape[1])] < 0.0
        phi[:, flip] *= -1.0
        self._lam, self._phi = lam, phi
        return self._lam[:count], self._phi[:, :count]

    def modes_for(self, t_min, cap=None):
        """Mode count for relative spectral truncation below 1e-12 at ``t_min``.

        Returns the smallest ``m`` with ``exp(-lambda_m t_min) < 1e-12``,
        capped at ``min(N, cap)`` (``cap`` defaults to the system's
        ``mode_cap``); a warning reports the truncation level if the
        cap bites.
        """
        if cap is None:
            cap = self.mode_cap
        target = _LOG_TRUNC / float(t_min)
        cap = int(min(self.size if self.size <= self.DENSE_LIMIT else self.size - 2, cap))
        lam, _ = self.eigenpairs(cap)
        above = np.nonzero(lam > target)[0]
        if above.size:
            return int(above[0]) + 1
        if cap >= self.size:
            return cap  # complete spectrum available: no truncation at all
        warnings.warn(
            f"spectral truncation at {cap} modes keeps exp(-lam t) = "
            f"{math.exp(-float(lam[-1]) * t_min):.2e} at t = {t_min:.3g}",
            stacklevel=2,
        )
        return cap

    # -- kernel evaluations ------------------------------------------------------

    def heat_kernel(self, t, i, j, modes=None):
        """Kernel value(s) ``h_t(i, j)`` by spectral summation."""
        if t <= 0.0:
            raise ParameterError("time must be positive")
        m = modes if modes is not None else self.modes_for(t)
        lam, phi = self.eigenpairs(m)
        e = np.exp(-lam * t)
        out = np.einsum("...k,...k->...", phi[i] * e, phi[j])
        return out

    def kernel_matrix(self, t, modes=None):
        m = modes if modes is not None else self.modes_for(t)
        lam, phi = self.eigenpairs(m)
        return (phi * np.exp(-lam * t)) @ phi.T

    def heat_diag(self, t, idx=None, modes=None):
        m = modes if modes is not None else self.modes_for(t)
        lam, phi = self.eigenpairs(m)
        block = phi if idx is None else phi[np.atleast_1d(idx)]
        return (block**2) @ np.exp(-lam * t)

    def semigroup_apply(self, t, vec, modes=None):
        m = modes if modes is not None else self.modes_for(t)
        lam, phi = self.eigenpairs(m)
        coeff = phi.T @ (self.mass * np.asarray(vec, dtype=float))
        return phi @ (np.exp(-lam * t) * coeff)


def heat_kernel(system: NeumannSystem, t, i, j):
    """Module-level convenience wrapper around the kernel evaluation."""
    return system.heat_kernel(t, i, j)


# ---------------------------------------------------------------------------
# curvature fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureField:
    """Lowest Ricci eigenvalue per node and its negative part."""

    rho: np.ndarray

    @property
    def rho_minus(self):
        return np.maximum(0.0, -self.rho)


def curvature_field(domain: DiscreteDomain) -> CurvatureField:
    """Geometric curvature field of a discrete domain.

    The interval is flat; on surfaces the lowest Ricci eigenvalue is
    ``(n - 1) K`` with the Gauss curvature ``K`` at the node.
    """
    if domain.kind == "interval":
        return CurvatureField(np.zeros(domain.size))
    surf = domain.spec.surface
    nodes_r = domain.nodes[:, 0]
    kvals = np.asarray(surf.gauss_curvature(nodes_r), dtype=float) \
        if surf.kind == "warped" else np.full(domain.size, surf.kappa)
    return CurvatureField((surf.dimension - 1) * kvals)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class DiagonalBoundResult:
    c_obs: float
    t_at: float
    x_at: int
    table: np.ndarray  # rows (t, max-over-x product)

    def to_dict(self):
        return {
            "c_obs": self.c_obs,
            "argmax_t": self.t_at,
            "argmax_node": int(self.x_at),
            "profile": [[float(a), float(b)] for a, b in self.table],
        }


def diagonal_bound_check(domain: DiscreteDomain, system: NeumannSystem,
                         t_grid, x_samples=None) -> DiagonalBoundResult:
    """Largest observed ``h_t(x,x) * Vol(B(x, sqrt(t)))`` over samples.

    The observed constant certifies the diagonal kernel bound shape;
    finiteness and refinement stability are the acceptance checks, the
    constant itself is a measured diagnostic.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    idx = domain.sample_indices(96) if x_samples is None else np.asarray(x_samples, int)
    dist = domain.distance_rows(idx)
    best = (-math.inf, None, None)
    table = []
    for t in t_grid:
        diag = system.heat_diag(t, idx)
        vols = (dist < math.sqrt(t)) @ domain.weights
        prod = diag * vols
        k = int(np.argmax(prod))
        table.append((float(t), float(prod[k])))
        if prod[k] > best[0]:
            best = (float(prod[k]), float(t), int(idx[k]))
    return DiagonalBoundResult(best[0], best[1], best[2], np.asarray(table))


def doubling_constant(domain: DiscreteDomain, R, x_count=64, radii=None):
    """Smallest C with ``Vol(B(x,t)) <= C (t/s)^n Vol(B(x,s))`` on samples.

    Radii default to a geometric grid from twice the mesh width to
    ``R``; volumes below the mesh scale are not meaningful.
    """
    if R <= 0.0 or R > domain.diameter() + 1e-12:
        raise ParameterError("doubling radius must lie in (0, diam]")
    if radii is None:
        radii = np.geomspace(2.0 * domain.mesh_width, R, 24)
    radii = np.asarray(radii, dtype=float)
    idx = domain.sample_indices(x_count)
    dist = domain.distance_rows(idx)
    vols = np.stack([(dist < rr) @ domain.weights for rr in radii], axis=-1)
    n = domain.n
    c_best = 1.0
    for i in range(len(radii)):
        for j in range(i, len(radii)):
            ratio = vols[:, j] / vols[:, i] * (radii[i] / radii[j]) ** n
            c_best = max(c_best, float(np.max(ratio)))
    return c_best


def doubling_comparability(domain: DiscreteDomain, s, x_count=48):
    """Worst ``Vol(B(y,s)) / Vol(B(x,s))`` over sampled pairs with d(x,y) <= s.

    Since ``B(y,s)`` is contained in ``B(x,2s)``, the doubling property
    bounds this ratio by ``2^n`` times the doubling constant.
    """
    idx = domain.sample_indices(x_count)
    dist = domain.distance_rows(idx)
    vols_idx = (dist < s) @ domain.weights
    worst = 1.0
    pair_d = dist[:, idx]
    for a in range(idx.shape[0]):
        near = pair_d[a] <= s
        worst = max(worst, float(np.max(vols_idx[near]) / vols_idx[a]))
    return worst


@dataclass
class GNResult:
    c_gn: float
    per_radius: list

    def to_dict(self):
        return {"c_gn": self.c_gn,
                "per_radius": [[float(r), float(c)] for r, c in self.per_radius]}


def gn_check(domain: DiscreteDomain, system: NeumannSystem, q, r_grid,
             n_random=12, seed=7) -> GNResult:
    """Smallest constant in the localized Gagliardo-Nirenberg inequality.

    Checks ``|| v_r^(1/2 - 1/q) f ||_q <= C (||f||_2 + r ||A^(1/2) f||_2)``
    over eigenfunction combinations and seeded random fields, per
    radius.  Requires ``q in (2, inf]`` with ``(q - 2)/q * n < 2``.
    """
    n = domain.n
    q = float(q)
    if not (q > 2.0):
        raise ParameterError("q must exceed 2")
    frac = 1.0 if math.isinf(q) else (q - 2.0) / q
    if frac * n >= 2.0:
        raise ParameterError("inadmissible (q, n): (q-2)/q * n must be < 2")
    alpha = 0.5 - (0.0 if math.isinf(q) else 1.0 / q)

    rng = np.random.default_rng(seed)
    lam, phi = system.eigenpairs(min(10, system.size - 1))
    fields = [phi[:, k] for k in range(phi.shape[1])]
    fields.append(phi[:, 0] + phi[:, min(1, phi.shape[1] - 1)])
    for _ in range(n_random):
        raw = rng.normal(size=domain.size)
        fields.append(system.semigroup_apply((domain.mesh_width * 4.0) ** 2, raw))

    w = domain.weights
    idx_all = np.arange(domain.size)
    dist = domain.distance_rows(idx_all)
    per_radius = []
    c_gn = 0.0
    for r in np.asarray(r_grid, dtype=float):
        v_r = (dist < r) @ w
        weight = v_r**alpha
        c_here = 0.0
        for f in fields:
            lhs_vals = np.abs(weight * f)
            if math.isinf(q):
                lhs = float(np.max(lhs_vals))
            else:
                lhs = float(np.sum(w * lhs_vals**q) ** (1.0 / q))
            rhs = math.sqrt(float(np.sum(w * f**2))) + r * math.sqrt(system.energy(f))
            if rhs > 0.0:
                c_here = max(c_here, lhs / rhs)
        per_radius.append((float(r), c_here))
        c_gn = max(c_gn, c_here)
    return GNResult(c_gn, per_radius)


_VEV_PAIRS = {(1.0, 2.0), (1.0, math.inf), (2.0, math.inf), (math.inf, math.inf)}


def vev_norm(system: NeumannSystem, v, p, q, gamma, t, modes=None):
    """Exact weighted-semigroup operator norm ``|| v^g e^(-tA) v^d ||_{p,q}``.

    ``d`` is fixed by ``g + d = 1/p - 1/q``.  Norms are with respect to
    the mass-weighted lp/lq norms; the supported (p, q) pairs are
    (1,2), (1,inf), (2,inf) and (inf,inf), each reduced to an exact
    kernel expression (max entry, column/row L2 norms, weighted row
    sums).
    """
    p, q = float(p), float(q)
    if (p, q) not in _VEV_PAIRS:
        raise ParameterError(f"unsupported (p, q) = ({p}, {q})")
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0.0):
        raise ParameterError("the weight must be positive")
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    delta = inv_p - inv_q - gamma
    H = system.kernel_matrix(t, modes=modes)
    K = (v**gamma)[:, None] * H * (v**delta)[None, :]
    w = system.mass
    if (p, q) == (1.0, math.inf):
        return float(np.max(np.abs(K)))
    if (p, q) == (1.0, 2.0):
        return float(np.max(np.sqrt(w @ (K**2))))
    if (p, q) == (2.0, math.inf):
        return float(np.max(np.sqrt((K**2) @ w)))
    return float(np.max(np.abs(K) @ w))


def vev_finiteness_sweep(system: NeumannSystem, domain: DiscreteDomain,
                         t0, n_t=10):
    """Sups of the four weighted-semigroup conditions over a time sweep.

    The (1,2) and (2,inf) conditions are swept up to ``t0 / 2`` and the
    (1,inf), (inf,inf) ones up to ``t0``; the weight is the ball-volume
    function at scale ``sqrt(t)``.  Returns the four sups and their
    finiteness flags, which the theory requires to agree.
    """
    dist = domain.distance_rows(np.arange(domain.size))

    def v_of(t):
        return (dist < math.sqrt(t)) @ domain.weights

    out = {}
    specs = {
        "vEv_inf_inf_half": (math.inf, math.inf, 0.5, t0),
        "vEv_1_inf_half": (1.0, math.inf, 0.5, t0),
        "vEv_1_2_zero": (1.0, 2.0, 0.0, 0.5 * t0),
        "vEv_2_inf_half": (2.0, math.inf, 0.5, 0.5 * t0),
    }
    for name, (p, q, gamma, t_hi) in specs.items():
        ts = np.geomspace(t_hi / 64.0, t_hi, n_t)
        sup = max(vev_norm(system, v_of(t), p, q, gamma, t) for t in ts)
        out[name] = {"sup": float(sup), "finite": bool(np.isfinite(sup))}
    out["flags_agree"] = len({d["finite"] for d in out.values() if isinstance(d, dict)}) == 1
    return out


def integral_ricci(domain: DiscreteDomain, rho_field: CurvatureField,
                   p, R, x_count=64):
    """Uniform lp-mean of the negative Ricci part over R-balls.

    ``sup_x ( mean_{B(x,R)} rho_minus^p )^(1/p)`` with node-weight
    quadrature; requires ``p > n/2``.
    """
    if p <= domain.n / 2.0:
        raise ParameterError("p must exceed n/2")
    rm = rho_field.rho_minus
    idx = domain.sample_indices(x_count)
    dist = domain.distance_rows(idx)
    inside = dist < float(R)
    num = inside @ (domain.weights * rm**p)
    den = inside @ domain.weights
    return float(np.max((num / den) ** (1.0 / p)))


def kato_quantity(system: NeumannSystem, rho_minus, T, modes=None):
    """Time integral of the sup norm of the heat semigroup on ``rho_minus``.

    ``int_0^T max_x (e^(-tA) rho_minus)(x) dt`` by adaptive quadrature
    with spectral evaluation of the semigroup action.
    """
    if T <= 0.0:
        raise ParameterError("T must be positive")
    rm = np.asarray(rho_minus, dtype=float)
    if not np.any(rm):
        return 0.0
    m = modes if modes is not None else system.modes_for(T / 1e4)
    lam, phi = system.eigenpairs(m)
    coeff = phi.T @ (system.mass * rm)

    def g(t):
        return float(np.max(phi @ (np.exp(-lam * t) * coeff))) if t > 0.0 \
            else float(np.max(rm))

    val, _err = _quad1d(g, 0.0, float(T), limit=200, epsabs=1e-13, epsrel=1e-12)
    return float(val)


def eigenvalue_diagnostic(system: NeumannSystem, domain: DiscreteDomain):
    """First nonzero eigenvalue and its scale-invariant form ``eta1 diam^2``."""
    lam, _ = system.eigenpairs(2)
    eta1 = float(lam[1])
    return eta1, eta1 * domain.diameter() ** 2


@dataclass
class LiYauResult:
    t_grid: np.ndarray
    sup_profile: np.ndarray
    a: float
    b: float
    violations: int
    clipped: bool

    def envelope(self, t):
        return self.a + self.b / np.asarray(t, dtype=float)

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "violations": int(self.violations),
            "clipped": bool(self.clipped),
            "profile": [[float(t), float(v)]
                        for t, v in zip(self.t_grid, self.sup_profile)],
        }


def fit_inverse_time_envelope(t_grid, profile):
    """Minimal nonnegative ``(a, b)`` with ``profile <= a + b / t`` on the grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    profile = np.asarray(profile, dtype=float)
    inv = 1.0 / t_grid
    res = linprog(
        c=[1.0, float(np.mean(inv))],
        A_ub=np.stack([-np.ones_like(inv), -inv], axis=-1),
        b_ub=-profile,
        bounds=[(0.0, None), (0.0, None)],
        method="highs",
    )
    if not res.success:
        raise ParameterError("envelope fit failed")
    return float(res.x[0]), float(res.x[1])


def li_yau_check(system: NeumannSystem, domain: DiscreteDomain, u0, t_grid,
                 alpha=1.0) -> LiYauResult:
    """Inverse-time gradient envelope for a positive Neumann heat solution.

    For each time the quantity ``alpha |grad ln u|^2 - d/dt ln u`` is
    maximized over interior nodes; the profile is then covered by a
    fitted envelope ``a + b/t``.  Non-positive solution values (a
    discretization artifact) are clipped with a warning.
    """
    if not (0.0 < alpha <= 1.0):
        raise ParameterError("alpha must lie in (0, 1]")
    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 <= 0.0):
        raise ParameterError("initial data must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    m = system.modes_for(float(np.min(t_grid)))
    lam, phi = system.eigenpairs(m)
    coeff = phi.T @ (system.mass * u0)
    interior = domain.interior_mask()
    clipped = False
    profile = np.empty(t_grid.shape[0])
    for k, t in enumerate(t_grid):
        damp = np.exp(-lam * t)
        u = phi @ (damp * coeff)
        du = phi @ (-lam * damp * coeff)
        floor = 1e-12 * float(np.max(np.abs(u)))
        if np.any(u <= floor):
            clipped = True
            u = np.maximum(u, floor)
        grad = domain.node_gradient(np.log(u))
        lhs = alpha * np.sum(grad**2, axis=-1) - du / u
        profile[k] = float(np.max(lhs[interior]))
    if clipped:
        warnings.warn("non-positive solution values clipped", stacklevel=2)
    a, b = fit_inverse_time_envelope(t_grid, profile)
    slack = 1e-9 * (1.0 + np.abs(profile))
    violations = int(np.count_nonzero(profile > a + b / t_grid + slack))
    return LiYauResult(t_grid, profile, a, b, violations, clipped)
