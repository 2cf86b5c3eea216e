"""Analytic shape zoo.

Every operation downstream works on a rasterized mask, but each shape
keeps its exact geometry: strict membership, distance to the true
boundary, outward normals, and exact box-to-set distances used by the
dyadic decomposition.  Some domains are truncations of unbounded sets
(the half-space strip, the perturbed half-space); for those the walls
introduced by the truncation are declared artificial and are never
treated as part of the boundary proper.

Point arrays have shape (N, nd).  Box arguments are (lo, hi) corner
pairs.  Distances follow set conventions: 0 means touching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Interval", "Box", "Ball", "Annulus", "LShape", "CuspGap",
    "HalfSpaceStrip", "PerturbedHalfSpace", "shape_from_spec",
]


def _pts(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    return a


def _box_gap(lo1, hi1, lo2, hi2) -> np.ndarray:
    """Per-axis gaps between two boxes; zero when overlapping."""
    return np.maximum(0.0, np.maximum(lo1 - hi2, lo2 - hi1))


def box_box_distance(lo1, hi1, lo2, hi2) -> float:
    g = _box_gap(np.asarray(lo1, float), np.asarray(hi1, float),
                 np.asarray(lo2, float), np.asarray(hi2, float))
    return float(np.sqrt((g * g).sum()))


def point_box_distance(p, lo, hi) -> np.ndarray:
    """Distance from points to a closed box (0 inside)."""
    p = _pts(p)
    g = np.maximum(np.maximum(np.asarray(lo) - p, p - np.asarray(hi)), 0.0)
    return np.sqrt((g * g).sum(axis=1))


def _far_corner_dist(c, lo, hi) -> float:
    d = np.maximum(np.abs(np.asarray(lo) - np.asarray(c)),
                   np.abs(np.asarray(hi) - np.asarray(c)))
    return float(np.sqrt((d * d).sum()))


def _near_point_dist(c, lo, hi) -> float:
    q = np.clip(np.asarray(c, float), lo, hi) - np.asarray(c, float)
    return float(np.sqrt((q * q).sum()))


class ShapeBase:
    """Interface shared by all shapes; see module docstring."""

    dim: int
    feature_exempt: bool = False

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def gamma_distance(self, pts) -> np.ndarray:
        """Distance to the true boundary (as a point set)."""
        raise NotImplementedError

    def normal(self, pts) -> np.ndarray:
        """Outward unit normal at the boundary point nearest to pts."""
        raise NotImplementedError

    def project(self, pts) -> np.ndarray:
        """Nearest point on the true boundary."""
        raise NotImplementedError

    def dist_to_closure(self, pts) -> np.ndarray:
        """Distance to the closed domain (0 inside)."""
        raise NotImplementedError

    def box_to_complement(self, lo, hi) -> float:
        """Exact distance from a box inside the set to the complement."""
        raise NotImplementedError

    def box_to_closure(self, lo, hi) -> float:
        """Exact distance from a box to the closed set."""
        raise NotImplementedError

    def artificial_planes(self) -> list[tuple[int, int, float]]:
        """(axis, side, coordinate) wall planes from truncation."""
        return []

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox()
        return float(np.sqrt(((hi - lo) ** 2).sum()))

    @property
    def min_feature(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Box(ShapeBase):
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must share a dimension")
        if not all(a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi on every axis")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def _lo(self):
        return np.asarray(self.lo, float)

    def _hi(self):
        return np.asarray(self.hi, float)

    def contains(self, pts):
        p = _pts(pts)
        return np.all((p > self._lo()) & (p < self._hi()), axis=1)

    def gamma_distance(self, pts):
        p = _pts(pts)
        inside_gap = np.minimum(p - self._lo(), self._hi() - p).min(axis=1)
        outside = point_box_distance(p, self._lo(), self._hi())
        return np.where(outside > 0, outside, np.abs(inside_gap))

    def normal(self, pts):
        p = _pts(pts)
        # nearest face: the axis/side with smallest slack (inside) or
        # largest violation (outside); ties resolve to the lowest axis
        q_lo = self._lo() - p
        q_hi = p - self._hi()
        q = np.maximum(q_lo, q_hi)  # signed slack toward each axis pair
        axis = np.argmax(q, axis=1)
        n = np.zeros_like(p)
        rows = np.arange(p.shape[0])
        sgn = np.where(q_hi[rows, axis] >= q_lo[rows, axis], 1.0, -1.0)
        n[rows, axis] = sgn
        return n

    def project(self, pts):
        p = _pts(pts)
        clamped = np.clip(p, self._lo(), self._hi())
        inside = np.all((p > self._lo()) & (p < self._hi()), axis=1)
        if not inside.any():
            return clamped
        out = clamped.copy()
        pi = p[inside]
        gap_lo = pi - self._lo()
        gap_hi = self._hi() - pi
        gaps = np.minimum(gap_lo, gap_hi)
        axis = np.argmin(gaps, axis=1)
        rows = np.arange(pi.shape[0])
        proj = pi.copy()
        to_hi = gap_hi[rows, axis] <= gap_lo[rows, axis]
        proj[rows, axis] = np.where(to_hi, self._hi()[axis], self._lo()[axis])
        out[inside] = proj
        return out

    def dist_to_closure(self, pts):
        return point_box_distance(pts, self._lo(), self._hi())

    def box_to_complement(self, lo, hi):
        gap = min(
            float(np.min(np.asarray(lo) - self._lo())),
            float(np.min(self._hi() - np.asarray(hi))),
        )
        return max(gap, 0.0)

    def box_to_closure(self, lo, hi):
        return box_box_distance(lo, hi, self._lo(), self._hi())

    def bbox(self):
        return self._lo(), self._hi()

    @property
    def min_feature(self):
        return float(np.min(self._hi() - self._lo()))


def Interval(a: float, b: float) -> Box:
    return Box((float(a),), (float(b),))


@dataclass(frozen=True)
class Ball(ShapeBase):
    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return len(self.center)

    def _c(self):
        return np.asarray(self.center, float)

    def _r(self, pts):
        p = _pts(pts) - self._c()
        return np.sqrt((p * p).sum(axis=1))

    def contains(self, pts):
        return self._r(pts) < self.radius

    def gamma_distance(self, pts):
        return np.abs(self._r(pts) - self.radius)

    def normal(self, pts):
        p = _pts(pts) - self._c()
        r = np.sqrt((p * p).sum(axis=1))
        r = np.where(r == 0, 1.0, r)
        return p / r[:, None]

    def project(self, pts):
        return self._c() + self.normal(pts) * self.radius

    def dist_to_closure(self, pts):
        return np.maximum(self._r(pts) - self.radius, 0.0)

    def box_to_complement(self, lo, hi):
        return max(self.radius - _far_corner_dist(self._c(), lo, hi), 0.0)

    def box_to_closure(self, lo, hi):
        return max(_near_point_dist(self._c(), lo, hi) - self.radius, 0.0)

    def bbox(self):
        return self._c() - self.radius, self._c() + self.radius

    @property
    def min_feature(self):
        return float(self.radius)


@dataclass(frozen=True)
class Annulus(ShapeBase):
    center: tuple[float, ...]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise ValueError("annulus needs 0 < r_inner < r_outer")

    @property
    def dim(self) -> int:
        return len(self.center)

    def _c(self):
        return np.asarray(self.center, float)

    def _r(self, pts):
        p = _pts(pts) - self._c()
        return np.sqrt((p * p).sum(axis=1))

    def contains(self, pts):
        r = self._r(pts)
        return (r > self.r_inner) & (r < self.r_outer)

    def gamma_distance(self, pts):
        r = self._r(pts)
        return np.minimum(np.abs(r - self.r_inner), np.abs(r - self.r_outer))

    def normal(self, pts):
        p = _pts(pts) - self._c()
        r = np.sqrt((p * p).sum(axis=1))
        rs = np.where(r == 0, 1.0, r)
        u = p / rs[:, None]
        inner_closer = np.abs(r - self.r_inner) < np.abs(r - self.r_outer)
        return np.where(inner_closer[:, None], -u, u)

    def project(self, pts):
        p = _pts(pts) - self._c()
        r = np.sqrt((p * p).sum(axis=1))
        rs = np.where(r == 0, 1.0, r)
        u = p / rs[:, None]
        inner_closer = np.abs(r - self.r_inner) < np.abs(r - self.r_outer)
        rad = np.where(inner_closer, self.r_inner, self.r_outer)
        return self._c() + u * rad[:, None]

    def dist_to_closure(self, pts):
        r = self._r(pts)
        return np.maximum(np.maximum(r - self.r_outer, self.r_inner - r), 0.0)

    def box_to_complement(self, lo, hi):
        outer = self.r_outer - _far_corner_dist(self._c(), lo, hi)
        inner = _near_point_dist(self._c(), lo, hi) - self.r_inner
        return max(min(outer, inner), 0.0)

    def box_to_closure(self, lo, hi):
        near = _near_point_dist(self._c(), lo, hi) - self.r_outer
        far = self.r_inner - _far_corner_dist(self._c(), lo, hi)
        return max(near, far, 0.0)

    def bbox(self):
        return self._c() - self.r_outer, self._c() + self.r_outer

    @property
    def min_feature(self):
        return float(self.r_outer - self.r_inner)


@dataclass(frozen=True)
class LShape(ShapeBase):
    """Axis box with its closed upper-right quadrant removed (2D)."""

    lo: tuple[float, float]
    hi: tuple[float, float]
    cut: tuple[float, float]  # lower-left corner of the removed quadrant

    def __post_init__(self):
        lo, hi, cut = map(np.asarray, (self.lo, self.hi, self.cut))
        if not (np.all(lo < cut) and np.all(cut < hi)):
            raise ValueError("cut corner must be strictly inside the box")

    dim = 2

    def _parts(self):
        """Two closed boxes whose union is the closed domain."""
        lo, hi, cut = self.lo, self.hi, self.cut
        a1 = ((lo[0], lo[1]), (cut[0], hi[1]))   # left arm
        a2 = ((cut[0], lo[1]), (hi[0], cut[1]))  # bottom arm
        return a1, a2

    def contains(self, pts):
        p = _pts(pts)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        cut = np.asarray(self.cut)
        in_box = np.all((p > lo) & (p < hi), axis=1)
        in_cut = np.all(p >= cut, axis=1)
        return in_box & ~in_cut

    def gamma_distance(self, pts):
        p = _pts(pts)
        box = Box(self.lo, self.hi)
        d_box = box.gamma_distance(p)
        d_cut = point_box_distance(p, np.asarray(self.cut), np.asarray(self.hi))
        inside = self.contains(p)
        a1, a2 = self._parts()
        d_out = np.minimum(point_box_distance(p, *a1), point_box_distance(p, *a2))
        d_in = np.minimum(d_box, d_cut)
        return np.where(inside, d_in, d_out)

    def normal(self, pts):
        p = _pts(pts)
        # nearest boundary feature among: outer box faces, cut faces
        box = Box(self.lo, self.hi)
        d_box = box.gamma_distance(p)
        cut_box = Box(self.cut, self.hi)
        d_cut = point_box_distance(p, np.asarray(self.cut), np.asarray(self.hi))
        n_box = box.normal(p)
        n_cut = -cut_box.normal(p)  # outward from the L means into the cut
        use_cut = d_cut < d_box
        return np.where(use_cut[:, None], n_cut, n_box)

    def project(self, pts):
        p = _pts(pts)
        box = Box(self.lo, self.hi)
        d_box = box.gamma_distance(p)
        d_cut = point_box_distance(p, np.asarray(self.cut), np.asarray(self.hi))
        pr_box = box.project(p)
        pr_cut = np.clip(p, np.asarray(self.cut), np.asarray(self.hi))
        use_cut = d_cut < d_box
        return np.where(use_cut[:, None], pr_cut, pr_box)

    def dist_to_closure(self, pts):
        a1, a2 = self._parts()
        return np.minimum(point_box_distance(pts, *a1), point_box_distance(pts, *a2))

    def box_to_complement(self, lo, hi):
        box_part = Box(self.lo, self.hi).box_to_complement(lo, hi)
        cut_part = box_box_distance(lo, hi, np.asarray(self.cut), np.asarray(self.hi))
        return max(min(box_part, cut_part), 0.0)

    def box_to_closure(self, lo, hi):
        a1, a2 = self._parts()
        return min(box_box_distance(lo, hi, *a1), box_box_distance(lo, hi, *a2))

    def bbox(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    @property
    def min_feature(self):
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        cut = np.asarray(self.cut)
        return float(min((cut - lo).min(), (hi - cut).min()))


@dataclass(frozen=True)
class CuspGap(ShapeBase):
    """Box minus two closed tangent disks: an outward-cusp domain.

    The two disks touch at a point inside the box, so the domain pinches
    to zero width there.  Deliberately not a uniform domain.
    """

    lo: tuple[float, float]
    hi: tuple[float, float]
    centers: tuple[tuple[float, float], tuple[float, float]]
    radius: float

    dim = 2
    feature_exempt = True  # the cusp is the point of the shape

    def __post_init__(self):
        c1, c2 = (np.asarray(c, float) for c in self.centers)
        gap = float(np.sqrt(((c1 - c2) ** 2).sum())) - 2 * self.radius
        if abs(gap) > 1e-12:
            raise ValueError("disks must be tangent")

    def contains(self, pts):
        p = _pts(pts)
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        ok = np.all((p > lo) & (p < hi), axis=1)
        for c in self.centers:
            d = p - np.asarray(c, float)
            ok &= (d * d).sum(axis=1) > self.radius ** 2
        return ok

    def gamma_distance(self, pts):
        p = _pts(pts)
        d = Box(self.lo, self.hi).gamma_distance(p)
        for c in self.centers:
            q = p - np.asarray(c, float)
            d = np.minimum(d, np.abs(np.sqrt((q * q).sum(axis=1)) - self.radius))
        return d

    def normal(self, pts):
        p = _pts(pts)
        box = Box(self.lo, self.hi)
        best_d = box.gamma_distance(p)
        best_n = box.normal(p)
        for c in self.centers:
            q = p - np.asarray(c, float)
            r = np.sqrt((q * q).sum(axis=1))
            d = np.abs(r - self.radius)
            rs = np.where(r == 0, 1.0, r)
            n = -q / rs[:, None]  # outward from the gap points into the disk
            closer = d < best_d
            best_n = np.where(closer[:, None], n, best_n)
            best_d = np.minimum(best_d, d)
        return best_n

    def project(self, pts):
        p = _pts(pts)
        box = Box(self.lo, self.hi)
        best_d = box.gamma_distance(p)
        best_pr = box.project(p)
        for c in self.centers:
            cc = np.asarray(c, float)
            q = p - cc
            r = np.sqrt((q * q).sum(axis=1))
            rs = np.where(r == 0, 1.0, r)
            pr = cc + q / rs[:, None] * self.radius
            d = np.abs(r - self.radius)
            closer = d < best_d
            best_pr = np.where(closer[:, None], pr, best_pr)
            best_d = np.minimum(best_d, d)
        return best_pr

    def box_to_complement(self, lo, hi):
        d = Box(self.lo, self.hi).box_to_complement(lo, hi)
        for c in self.centers:
            d = min(d, max(_near_point_dist(np.asarray(c, float), lo, hi) - self.radius, 0.0))
        return max(d, 0.0)

    def box_to_closure(self, lo, hi):
        outer = Box(self.lo, self.hi).box_to_closure(lo, hi)
        if outer > 0:
            return outer
        # inside the outer box: positive only for boxes buried in a disk,
        # where the nearest closure point sits radially on its circle
        for c in self.centers:
            far = _far_corner_dist(np.asarray(c, float), lo, hi)
            if far < self.radius:
                return self.radius - far
        return 0.0

    def bbox(self):
        return np.asarray(self.lo, float), np.asarray(self.hi, float)

    @property
    def min_feature(self):
        return float(self.radius)


@dataclass(frozen=True)
class HalfSpaceStrip(ShapeBase):
    """Truncated half-space {x_n > 0}: a box whose only true boundary
    is the bottom face; side and top walls are truncation artifacts."""

    width: float
    height: float
    dim: int = 2

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("strip needs positive width and height")

    def _lo(self):
        lo = np.full(self.dim, -self.width / 2.0)
        lo[-1] = 0.0
        return lo

    def _hi(self):
        hi = np.full(self.dim, self.width / 2.0)
        hi[-1] = self.height
        return hi

    def contains(self, pts):
        p = _pts(pts)
        return np.all((p > self._lo()) & (p < self._hi()), axis=1)

    def gamma_distance(self, pts):
        p = _pts(pts)
        lo = self._lo().copy()
        hi = self._hi().copy()
        hi[-1] = 0.0  # the true boundary is the bottom face
        return point_box_distance(p, lo, hi)

    def normal(self, pts):
        p = _pts(pts)
        n = np.zeros_like(p)
        n[:, -1] = -1.0
        return n

    def project(self, pts):
        p = _pts(pts)
        lo = self._lo().copy()
        hi = self._hi().copy()
        hi[-1] = 0.0
        return np.clip(p, lo, hi)

    def dist_to_closure(self, pts):
        return point_box_distance(pts, self._lo(), self._hi())

    def box_to_complement(self, lo, hi):
        return Box(tuple(self._lo()), tuple(self._hi())).box_to_complement(lo, hi)

    def box_to_closure(self, lo, hi):
        return Box(tuple(self._lo()), tuple(self._hi())).box_to_closure(lo, hi)

    def artificial_planes(self):
        planes = []
        for k in range(self.dim - 1):
            planes.append((k, -1, -self.width / 2.0))
            planes.append((k, +1, self.width / 2.0))
        planes.append((self.dim - 1, +1, self.height))
        return planes

    def bbox(self):
        return self._lo(), self._hi()

    @property
    def min_feature(self):
        return float(min(self.width, self.height))


def _bump(t: np.ndarray) -> np.ndarray:
    """C^2 compact bump (1 - t^2)^3 on |t| < 1."""
    u = np.clip(t, -1.0, 1.0)
    v = 1.0 - u * u
    return np.where(np.abs(t) < 1.0, v ** 3, 0.0)


def _bump_d1(t: np.ndarray) -> np.ndarray:
    u = np.clip(t, -1.0, 1.0)
    v = 1.0 - u * u
    return np.where(np.abs(t) < 1.0, -6.0 * u * v ** 2, 0.0)


def _bump_d2(t: np.ndarray) -> np.ndarray:
    u = np.clip(t, -1.0, 1.0)
    v = 1.0 - u * u
    return np.where(np.abs(t) < 1.0, -6.0 * v ** 2 + 24.0 * u * u * v, 0.0)


@dataclass(frozen=True)
class PerturbedHalfSpace(ShapeBase):
    """Half-space bent by a compactly supported C^2 bump: the region
    above the graph x_2 = psi(x_1), truncated by artificial walls.

    psi(t) = amplitude * (1 - (t/bump_width)^2)^3 on |t| < bump_width.
    The graph is the true boundary; because psi is compactly supported
    and nonzero, the boundary normals span the plane.
    """

    width: float
    height: float
    amplitude: float
    bump_width: float
    dim: int = 2
    _tgrid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim != 2:
            raise ValueError("perturbed half-space implemented for dim 2")
        if not 0 < self.bump_width < self.width / 2:
            raise ValueError("bump must fit strictly inside the strip")
        if not 0 < self.amplitude < self.height:
            raise ValueError("amplitude must sit inside the box")
        object.__setattr__(self, "_tgrid",
                           np.linspace(-self.width / 2, self.width / 2, 8193))

    def psi(self, t):
        return self.amplitude * _bump(np.asarray(t, float) / self.bump_width)

    def psi_d1(self, t):
        w = self.bump_width
        return self.amplitude / w * _bump_d1(np.asarray(t, float) / w)

    def psi_d2(self, t):
        w = self.bump_width
        return self.amplitude / w ** 2 * _bump_d2(np.asarray(t, float) / w)

    def contains(self, pts):
        p = _pts(pts)
        ok = (np.abs(p[:, 0]) < self.width / 2) & (p[:, 1] < self.height)
        return ok & (p[:, 1] > self.psi(p[:, 0]))

    def _nearest_param(self, pts):
        """Graph parameter of the nearest boundary point, by dense scan
        plus one parabolic refinement (the graph is C^2)."""
        p = _pts(pts)
        t = self._tgrid
        g = self.psi(t)
        out = np.empty(p.shape[0])
        step = t[1] - t[0]
        for s in range(0, p.shape[0], 1024):
            chunk = p[s:s + 1024]
            d2 = (chunk[:, 0:1] - t[None, :]) ** 2 + (chunk[:, 1:2] - g[None, :]) ** 2
            j = np.argmin(d2, axis=1)
            jm = np.clip(j - 1, 0, t.size - 1)
            jp = np.clip(j + 1, 0, t.size - 1)
            rows = np.arange(chunk.shape[0])
            a, b, c = d2[rows, jm], d2[rows, j], d2[rows, jp]
            denom = a - 2 * b + c
            with np.errstate(divide="ignore", invalid="ignore"):
                delta = np.where(denom > 0, 0.5 * (a - c) / denom, 0.0)
            delta = np.clip(delta, -1.0, 1.0)
            out[s:s + 1024] = t[j] + delta * step
        return out

    def gamma_distance(self, pts):
        p = _pts(pts)
        tt = self._nearest_param(p)
        dx = p[:, 0] - tt
        dy = p[:, 1] - self.psi(tt)
        return np.sqrt(dx * dx + dy * dy)

    def normal(self, pts):
        tt = self._nearest_param(_pts(pts))
        g1 = self.psi_d1(tt)
        denom = np.sqrt(1.0 + g1 * g1)
        return np.stack([g1 / denom, -1.0 / denom], axis=1)

    def project(self, pts):
        tt = self._nearest_param(_pts(pts))
        return np.stack([tt, self.psi(tt)], axis=1)

    def dist_to_closure(self, pts):
        p = _pts(pts)
        blo, bhi = self.bbox()
        q = np.clip(p, blo, bhi)
        box_d = np.sqrt(((p - q) ** 2).sum(axis=1))
        # the bbox clamp is a closure point unless it falls under the graph
        clamp_ok = q[:, 1] >= self.psi(q[:, 0])
        return np.where(clamp_ok, box_d, self.gamma_distance(p))

    def _scan_min(self, profile) -> float:
        """Min of a squared-distance profile over the graph parameter,
        dense grid plus one parabolic refinement."""
        t = self._tgrid
        d2 = profile(t)
        j = int(np.argmin(d2))
        jm, jp = max(j - 1, 0), min(j + 1, t.size - 1)
        a, b, c = float(d2[jm]), float(d2[j]), float(d2[jp])
        denom = a - 2.0 * b + c
        if denom > 0:
            delta = min(max(0.5 * (a - c) / denom, -1.0), 1.0)
            # the profile is only defined over the slab parameters
            tr = min(max(t[j] + delta * (t[1] - t[0]), t[0]), t[-1])
            b = min(b, float(profile(np.array([tr]))[0]))
        return math.sqrt(max(b, 0.0))

    def box_to_complement(self, lo, hi):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        blo, bhi = self.bbox()
        walls = Box(tuple(blo), tuple(bhi)).box_to_complement(lo, hi)

        def under(t):
            dx = np.maximum(np.maximum(lo[0] - t, t - hi[0]), 0.0)
            dy = np.maximum(lo[1] - self.psi(t), 0.0)
            return dx * dx + dy * dy

        return min(walls, self._scan_min(under))

    def box_to_closure(self, lo, hi):
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)

        def toward(t):
            # admissible heights at parameter t fill [psi(t), height]
            dx = np.maximum(np.maximum(lo[0] - t, t - hi[0]), 0.0)
            dy = np.maximum(np.maximum(self.psi(t) - hi[1],
                                       lo[1] - self.height), 0.0)
            return dx * dx + dy * dy

        return self._scan_min(toward)

    def artificial_planes(self):
        return [(0, -1, -self.width / 2.0), (0, +1, self.width / 2.0),
                (1, +1, self.height)]

    def bbox(self):
        return (np.array([-self.width / 2.0, 0.0]),
                np.array([self.width / 2.0, self.height]))

    @property
    def max_curvature(self) -> float:
        t = self._tgrid
        g1 = self.psi_d1(t)
        g2 = self.psi_d2(t)
        kappa = np.abs(g2) / (1.0 + g1 * g1) ** 1.5
        return float(kappa.max())

    @property
    def min_feature(self):
        geo = min(self.width / 2 - self.bump_width, self.height - self.amplitude)
        kappa = self.max_curvature
        if kappa > 0:
            geo = min(geo, 1.0 / kappa)
        return float(geo)


_SHAPES = {
    "interval": lambda p: Interval(p["a"], p["b"]),
    "box": lambda p: Box(tuple(p["lo"]), tuple(p["hi"])),
    "square": lambda p: Box((0.0, 0.0), (p.get("side", 1.0),) * 2),
    "cube": lambda p: Box((0.0, 0.0, 0.0), (p.get("side", 1.0),) * 3),
    "disk": lambda p: Ball(tuple(p.get("center", (0.0, 0.0))), p.get("radius", 1.0)),
    "ball": lambda p: Ball(tuple(p.get("center", (0.0, 0.0, 0.0))), p.get("radius", 1.0)),
    "annulus": lambda p: Annulus(tuple(p.get("center", (0.0, 0.0))),
                                 p["r_inner"], p["r_outer"]),
    "l_shape": lambda p: LShape(tuple(p.get("lo", (0.0, 0.0))),
                                tuple(p.get("hi", (1.0, 1.0))),
                                tuple(p.get("cut", (0.5, 0.5)))),
    "cusp": lambda p: CuspGap(tuple(p.get("lo", (-1.0, -1.0))),
                              tuple(p.get("hi", (1.0, 1.0))),
                              ((0.0, -p.get("radius", 0.5)), (0.0, p.get("radius", 0.5))),
                              p.get("radius", 0.5)),
    "halfspace": lambda p: HalfSpaceStrip(p.get("width", 2.0), p.get("height", 1.0),
                                          p.get("dim", 2)),
    "perturbed_halfspace": lambda p: PerturbedHalfSpace(
        p.get("width", 4.0), p.get("height", 1.5),
        p.get("amplitude", 0.4), p.get("bump_width", 1.0)),
}


SHAPE_TYPES = tuple(sorted(_SHAPES))


def shape_from_spec(spec: dict) -> ShapeBase:
    """Build a shape from a {"type": ..., "params": {...}} document."""
    kind = spec["type"]
    try:
        factory = _SHAPES[kind]
    except KeyError:
        raise ValueError(f"unknown shape type {kind!r}; known: {sorted(_SHAPES)}")
    return factory(spec.get("params", {}))
