"""Normal coordinates near the boundary: analytic charts for the test
shapes, the frame matrix of the coordinate map, the inverse-last-row
identity, and the normal-component transform of vector fields.

A chart maps slab coordinates y = (y', y_n) to ambient points
x = z(y') - y_n * n(z(y')), where z parametrizes the boundary near a
base point and n is the exterior unit normal.  Columns of the Jacobian
are a_j = dz/dy_j - y_n * dn/dy_j and a_n = -n; the a_j stay tangential
to the offset surface, so a_n is orthogonal to them, which forces the
last row of the inverse matrix to equal a_n transposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grids import GridDomain
from .shapes import Annulus, Ball, HalfSpaceStrip, PerturbedHalfSpace

__all__ = [
    "NormalChart", "HalfSpaceChart", "CircleChart", "GraphChart",
    "FrameMatrix", "chart_for", "normal_map", "frame_matrix",
    "inverse_last_row", "synthetic_frames", "transform_vector_field",
    "verify_chart",
]


@dataclass(frozen=True)
class FrameMatrix:
    """Jacobian frame at one or many slab points."""
    matrix: np.ndarray       # (..., n, n), columns a_1..a_{n-1}, a_n
    y: np.ndarray

    @property
    def a_n(self) -> np.ndarray:
        return self.matrix[..., :, -1]

    @property
    def det(self) -> np.ndarray:
        return np.linalg.det(self.matrix)

    def orthogonality_residual(self) -> float:
        """max |a_j . a_n| over tangent columns; zero analytically."""
        dots = np.einsum("...ij,...i->...j", self.matrix[..., :, :-1],
                         self.a_n)
        return float(np.abs(dots).max()) if dots.size else 0.0


class NormalChart:
    """Base chart: subclasses supply the boundary parametrization, the
    exterior normal, and their derivatives along the parameters."""

    dim: int
    r: float          # tangential half-extent
    delta: float      # depth extent
    reach: float      # curvature bound: frames stay invertible below it

    def boundary(self, yp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def normal(self, yp: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tangent_columns(self, yp: np.ndarray) -> np.ndarray:
        """(..., n, n-1) array of dz/dy_j."""
        raise NotImplementedError

    def dnormal_columns(self, yp: np.ndarray) -> np.ndarray:
        """(..., n, n-1) array of dn/dy_j."""
        raise NotImplementedError

    # shared machinery

    def _check_slab(self, y: np.ndarray):
        yp, yn = y[..., :-1], y[..., -1]
        if (np.abs(yp) >= self.r).any() or (np.abs(yn) >= self.delta).any():
            raise ValueError("point outside the chart slab")

    def map(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        self._check_slab(y)
        yp, yn = y[..., :-1], y[..., -1:]
        return self.boundary(yp) - yn * self.normal(yp)

    def frame(self, y) -> FrameMatrix:
        y = np.asarray(y, dtype=np.float64)
        self._check_slab(y)
        yp, yn = y[..., :-1], y[..., -1]
        if (yn >= self.reach).any():
            raise ValueError("depth at or beyond the curvature reach")
        cols = self.tangent_columns(yp) - yn[..., None, None] * \
            self.dnormal_columns(yp)
        an = -self.normal(yp)
        m = np.concatenate([cols, an[..., :, None]], axis=-1)
        fr = FrameMatrix(m, y)
        if (fr.det <= 0).any():
            raise ValueError("degenerate frame inside the slab")
        return fr


class HalfSpaceChart(NormalChart):
    """Flat boundary x_n = 0, domain above; the map is the identity up
    to the base-point shift and the frame is exactly I."""

    def __init__(self, base_t: float = 0.0, r: float = 1.0,
                 delta: float = 1.0, dim: int = 2):
        self.dim = dim
        self.base_t = float(base_t)
        self.r = float(r)
        self.delta = float(delta)
        self.reach = math.inf

    def boundary(self, yp):
        z = np.zeros(yp.shape[:-1] + (self.dim,))
        z[..., :-1] = yp
        z[..., 0] += self.base_t
        return z

    def normal(self, yp):
        n = np.zeros(yp.shape[:-1] + (self.dim,))
        n[..., -1] = -1.0
        return n

    def tangent_columns(self, yp):
        cols = np.zeros(yp.shape[:-1] + (self.dim, self.dim - 1))
        for j in range(self.dim - 1):
            cols[..., j, j] = 1.0
        return cols

    def dnormal_columns(self, yp):
        return np.zeros(yp.shape[:-1] + (self.dim, self.dim - 1))


class CircleChart(NormalChart):
    """Arc-length chart on a circle of radius R.  sign +1 means the
    domain is inside the circle (disk, annulus outer boundary), -1 means
    outside (annulus inner boundary); the parameter orientation follows
    the sign so the frame determinant stays positive."""

    def __init__(self, center, radius: float, theta0: float = 0.0,
                 sign: float = 1.0, r: float | None = None,
                 delta: float | None = None):
        self.dim = 2
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)
        self.theta0 = float(theta0)
        self.sign = float(sign)
        self.r = float(r) if r is not None else 0.5 * self.radius
        self.reach = self.radius if self.sign > 0 else math.inf
        self.delta = float(delta) if delta is not None else 0.5 * self.reach

    def _theta(self, yp):
        return self.theta0 + self.sign * yp[..., 0] / self.radius

    def boundary(self, yp):
        th = self._theta(yp)
        return self.center + self.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=-1)

    def normal(self, yp):
        th = self._theta(yp)
        return self.sign * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def tangent_columns(self, yp):
        th = self._theta(yp)
        t = self.sign * np.stack([-np.sin(th), np.cos(th)], axis=-1)
        return t[..., :, None]

    def dnormal_columns(self, yp):
        # dn/ds = (sign/R) * t with t the unit tangent column
        return self.tangent_columns(yp) * (self.sign / self.radius)


class GraphChart(NormalChart):
    """Chart over a C^2 graph boundary x_2 = psi(x_1), domain above;
    parametrized by the abscissa (not arc length)."""

    def __init__(self, shape: PerturbedHalfSpace, base_t: float = 0.0,
                 r: float = 0.5, delta: float | None = None):
        self.dim = 2
        self.shape = shape
        self.base_t = float(base_t)
        self.r = float(r)
        kmax = self._max_curvature()
        self.reach = 1.0 / kmax if kmax > 0 else math.inf
        self.delta = float(delta) if delta is not None else 0.5 * self.reach

    def _max_curvature(self) -> float:
        t = np.linspace(self.base_t - self.r, self.base_t + self.r, 4097)
        g1, g2 = self.shape.psi_d1(t), self.shape.psi_d2(t)
        return float(np.abs(g2 / (1 + g1 * g1) ** 1.5).max())

    def _t(self, yp):
        return self.base_t + yp[..., 0]

    def boundary(self, yp):
        t = self._t(yp)
        return np.stack([t, self.shape.psi(t)], axis=-1)

    def normal(self, yp):
        t = self._t(yp)
        g1 = self.shape.psi_d1(t)
        q = np.sqrt(1.0 + g1 * g1)
        return np.stack([g1 / q, -1.0 / q], axis=-1)

    def tangent_columns(self, yp):
        t = self._t(yp)
        g1 = self.shape.psi_d1(t)
        return np.stack([np.ones_like(g1), g1], axis=-1)[..., :, None]

    def dnormal_columns(self, yp):
        t = self._t(yp)
        g1, g2 = self.shape.psi_d1(t), self.shape.psi_d2(t)
        kappa = g2 / (1.0 + g1 * g1) ** 1.5
        q = np.sqrt(1.0 + g1 * g1)
        # dn/dt = kappa * (unit tangent) * q = kappa * (1, g1)
        return (kappa[..., None] * np.stack(
            [np.ones_like(g1), g1], axis=-1))[..., :, None]


def chart_for(shape, base: float = 0.0, r: float | None = None,
              delta: float | None = None, boundary: str = "outer") -> NormalChart:
    """Analytic chart for a test shape; base is an angle for circular
    boundaries and an abscissa for graphs."""
    if isinstance(shape, HalfSpaceStrip):
        return HalfSpaceChart(base, r or shape.width / 4,
                              delta or shape.height / 2, shape.dim)
    if isinstance(shape, Ball):
        if shape.dim != 2:
            raise ValueError("circle charts are two-dimensional")
        return CircleChart(shape.center, shape.radius, base, +1.0, r, delta)
    if isinstance(shape, Annulus):
        if boundary == "outer":
            return CircleChart(shape.center, shape.r_outer, base, +1.0, r, delta)
        return CircleChart(shape.center, shape.r_inner, base, -1.0, r, delta)
    if isinstance(shape, PerturbedHalfSpace):
        return GraphChart(shape, base, r or shape.bump_width, delta)
    raise ValueError(f"no analytic chart for {type(shape).__name__}")


def normal_map(chart: NormalChart, y) -> np.ndarray:
    return chart.map(y)


def frame_matrix(chart: NormalChart, y) -> FrameMatrix:
    return chart.frame(y)


def inverse_last_row(matrix: np.ndarray) -> tuple:
    """Last row of the numerical inverse and its sup-distance from the
    transposed last column (zero when a_n is unit and orthogonal to the
    other columns)."""
    m = np.asarray(matrix, dtype=np.float64)
    if np.linalg.cond(m) > 1e12:
        raise ValueError("matrix condition number exceeds 1e12")
    row = np.linalg.inv(m)[-1, :]
    residual = float(np.abs(row - m[:, -1]).max())
    return row, residual


def synthetic_frames(dim: int, count: int, seed: int = 0xF4A3) -> np.ndarray:
    """Random frames (G | u): u a random unit vector, G random columns
    projected onto the orthogonal complement of u and re-perturbed
    inside it, so the inverse-last-row identity holds exactly."""
    rng = np.random.default_rng(seed)
    out = np.empty((count, dim, dim))
    made = 0
    while made < count:
        u = rng.standard_normal(dim)
        u /= np.linalg.norm(u)
        proj = np.eye(dim) - np.outer(u, u)
        g = proj @ rng.standard_normal((dim, dim - 1))
        g += 0.1 * (proj @ rng.standard_normal((dim, dim - 1)))
        a = np.concatenate([g, u[:, None]], axis=1)
        if abs(np.linalg.det(a)) < 1e-6:
            continue
        out[made] = a
        made += 1
    return out


def _interp(comp: np.ndarray, dom: GridDomain, x: np.ndarray) -> np.ndarray:
    g = dom.grid
    coords = [(x[:, k] - g.origin[k]) / g.h for k in range(g.dim)]
    return ndimage.map_coordinates(np.asarray(comp, dtype=np.float64),
                                   coords, order=1, mode="nearest")


def transform_vector_field(v, dom: GridDomain, chart: NormalChart,
                           n_tangent: int = 48, n_depth: int = 24,
                           margin: float = 0.9) -> dict:
    """Pull a vector field back through the chart and compare its slab
    normal component with the independently computed product of the
    distance gradient and the field.

    v is a sequence of component arrays sampled on the full grid (so
    multilinear interpolation near the boundary is clean).  Returns the
    slab samples, the transformed components, the check field, and the
    sup deviation |w_n - grad d . v|.
    """
    g = dom.grid
    if dom.shape is None:
        raise ValueError("transform needs an analytic shape")
    nd = g.dim
    rr = margin * chart.r
    depth_hi = min(margin * chart.delta, margin * chart.reach)
    lo_depth = 2.0 * g.h
    if lo_depth >= depth_hi:
        raise ValueError("slab too shallow for the interpolation stencil")
    tang = (np.arange(n_tangent) + 0.5) / n_tangent * 2 * rr - rr
    depth = lo_depth + (np.arange(n_depth) + 0.5) / n_depth * (depth_hi - lo_depth)
    yy = np.stack(np.meshgrid(*([tang] * (nd - 1) + [depth]), indexing="ij"),
                  axis=-1).reshape(-1, nd)
    x = chart.map(yy)
    fr = chart.frame(yy)
    vx = np.stack([_interp(np.asarray(c), dom, x) for c in v], axis=-1)
    w = np.linalg.solve(fr.matrix, vx[..., None])[..., 0]
    grad_d = -dom.shape.normal(x)
    check = np.einsum("ij,ij->i", grad_d, vx)
    dev = float(np.abs(w[:, -1] - check).max())
    return {"y": yy, "x": x, "w": w, "normal_component": w[:, -1],
            "check": check, "max_deviation": dev, "frame": fr}


def verify_chart(chart: NormalChart, dom: GridDomain | None = None,
                 n_samples: int = 1000, seed: int = 0xC4A7) -> dict:
    """Slab-sampled invariant report: positive determinant, tangent and
    normal column orthogonality, unit normal column, and (when a domain
    is supplied) agreement of the distance field with the depth."""
    rng = np.random.default_rng(seed)
    nd = chart.dim
    yp = (rng.random((n_samples, nd - 1)) * 2 - 1) * chart.r * 0.95
    yn = rng.random((n_samples, 1)) * min(chart.delta, chart.reach) * 0.9
    y = np.concatenate([yp, yn], axis=1)
    fr = chart.frame(y)
    x = chart.map(y)
    out = {
        "det_min": float(fr.det.min()),
        "orthogonality": fr.orthogonality_residual(),
        "unit_normal": float(np.abs(
            np.linalg.norm(fr.a_n, axis=-1) - 1.0).max()),
        "n_samples": int(n_samples),
    }
    if dom is not None:
        dv = dom.dist.values_analytic if dom.dist.values_analytic is not None \
            else dom.dist.values
        depth_err = np.abs(_interp(np.where(np.isfinite(dv), dv, 0.0), dom, x)
                           - y[:, -1])
        inside = dom.shape.contains(x)
        out["depth_error"] = float(depth_err[inside].max()) if inside.any() else 0.0
    return out
