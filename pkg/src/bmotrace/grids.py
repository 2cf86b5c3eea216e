"""Uniform cell-centered grids and rasterized domains.

A domain couples a grid with a boolean occupancy mask and (usually) the
analytic shape it was rasterized from.  The discrete boundary is the set
of faces between an occupied cell and an unoccupied one (or the edge of
the grid); each such face contributes its midpoint as an interface
sample.  Faces lying on walls that merely truncate an unbounded shape
are marked artificial and never enter the interface: distances, normals
and boundary seminorms all refer to the true boundary only.

Distance conventions:
  d(cell)  - Euclidean distance from the cell center to the nearest
             true interface midpoint (exact for the discrete interface).
  cr2(cell) - integer squared distance, in cell units, to the nearest
             unoccupied cell center (grid exterior counts as unoccupied).
             A ball of squared radius q*h^2 around the cell stays inside
             the mask iff cr2 > q; every engine uses this test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .ballgeom import BallCache
from .shapes import ShapeBase

__all__ = [
    "Grid", "GridDomain", "DistanceField", "BoundaryMesh",
    "build_domain", "tubular_neighborhood", "nearest_point_projection",
    "DomainResolutionError", "AmbiguousProjectionError",
]


class DomainResolutionError(ValueError):
    """Shape feature below the resolvable scale (4 cells)."""


class AmbiguousProjectionError(ValueError):
    """Nearest-point projection outside the reliable collar."""

    def __init__(self, message: str, witnesses):
        super().__init__(message)
        self.witnesses = witnesses  # list of (point, near-minimizer positions)


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform lattice: cell i sits at origin + i*h."""

    shape: tuple[int, ...]
    h: float
    origin: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis_centers(self, k: int) -> np.ndarray:
        return self.origin[k] + self.h * np.arange(self.shape[k])

    def centers(self) -> np.ndarray:
        """(N, nd) cell centers in row-major cell order."""
        axes = [self.axis_centers(k) for k in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def coords_of(self, flat: np.ndarray) -> np.ndarray:
        return np.stack(np.unravel_index(flat, self.shape), axis=1)

    def world(self, coords: np.ndarray) -> np.ndarray:
        return np.asarray(self.origin) + self.h * np.asarray(coords, dtype=np.float64)

    @property
    def dyadic_aligned(self) -> bool:
        """True when cell boundaries line up with multiples of h and h
        is a power of two, so grid cells are dyadic cubes."""
        m, e = math.frexp(self.h)
        if m != 0.5:
            return False
        for k in range(self.dim):
            t = (self.origin[k] - self.h / 2.0) / self.h
            if abs(t - round(t)) > 1e-9:
                return False
        return True

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(self.origin) - self.h / 2.0
        hi = lo + self.h * np.asarray(self.shape)
        return lo, hi

    @property
    def diameter(self) -> float:
        lo, hi = self.bbox
        return float(np.sqrt(((hi - lo) ** 2).sum()))


@dataclass
class BoundaryMesh:
    """True-interface face midpoints with normals and surface weights.

    Faces are ordered by (axis, side, cell row-major); that order is the
    canonical iteration order for boundary suprema.  Weights carry the
    obliquity factor |n . e_axis| * h^(nd-1) so that sum(weights)
    approximates the surface measure.
    """

    positions: np.ndarray          # (M, nd) float
    normals: np.ndarray            # (M, nd) float, outward unit
    weights: np.ndarray            # (M,)
    anchors: np.ndarray            # (M, nd) int64 adjacent inside cell
    axes: np.ndarray               # (M,) int8 face normal axis
    signs: np.ndarray              # (M,) int8 +-1, direction out of the mask
    components: np.ndarray         # (M,) int32 connected component label
    group_slices: dict = field(default_factory=dict)  # (axis, sign) -> slice
    n_artificial: int = 0

    @property
    def count(self) -> int:
        return int(self.positions.shape[0])

    @property
    def n_components(self) -> int:
        return int(self.components.max()) + 1 if self.count else 0

    def surface_measure(self) -> float:
        return float(self.weights.sum())


@dataclass
class DistanceField:
    """Distance to the true interface, with gradient and reliability."""

    values: np.ndarray             # (shape) float, inf when no interface
    grad: np.ndarray               # (nd, shape) unit, NaN where undefined
    reliable: np.ndarray           # (shape) bool: unique nearest patch
    reach_estimate: float
    nearest_index: np.ndarray      # (shape) int64 into boundary positions
    analytic: bool = False
    values_analytic: np.ndarray | None = None


def _connected_components(positions: np.ndarray, h: float) -> np.ndarray:
    m = positions.shape[0]
    labels = np.arange(m, dtype=np.int64)

    def find(i):
        root = i
        while labels[root] != root:
            root = labels[root]
        while labels[i] != root:
            labels[i], i = root, labels[i]
        return root

    if m:
        tree = cKDTree(positions)
        for i, j in tree.query_pairs(1.05 * h):
            ri, rj = find(i), find(j)
            if ri != rj:
                labels[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(m)], dtype=np.int64)
    _, comp = np.unique(roots, return_inverse=True)
    return comp.astype(np.int32)


class GridDomain:
    """Rasterized domain: grid + mask + optional analytic shape."""

    def __init__(self, grid: Grid, mask: np.ndarray, shape: ShapeBase | None = None,
                 name: str = "domain"):
        if mask.shape != grid.shape:
            raise ValueError("mask shape does not match grid")
        self.grid = grid
        self.mask = np.ascontiguousarray(mask, dtype=bool)
        self.shape = shape
        self.name = name
        self._dist: DistanceField | None = None
        self._boundary: BoundaryMesh | None = None
        self._cr2: np.ndarray | None = None
        self._balls: BallCache | None = None
        self._grad_field: np.ndarray | None = None

    # -- basic views ---------------------------------------------------

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def mask_flat(self) -> np.ndarray:
        return self.mask.reshape(-1)

    @property
    def volume(self) -> float:
        return float(self.mask.sum()) * self.h ** self.dim

    @property
    def balls(self) -> BallCache:
        if self._balls is None:
            self._balls = BallCache(self.grid.shape)
        return self._balls

    # -- containment radius ---------------------------------------------

    @property
    def cr2(self) -> np.ndarray:
        """Integer squared distance (cell units) to the nearest
        unoccupied cell center, counting the grid exterior."""
        if self._cr2 is None:
            padded = np.pad(self.mask, 1, constant_values=False)
            idx = ndimage.distance_transform_edt(
                padded, return_distances=False, return_indices=True)
            pos = np.indices(padded.shape)
            cr2 = ((idx.astype(np.int64) - pos) ** 2).sum(axis=0)
            sl = tuple(slice(1, -1) for _ in range(self.dim))
            self._cr2 = np.ascontiguousarray(cr2[sl])
        return self._cr2

    # -- boundary mesh ---------------------------------------------------

    @property
    def boundary(self) -> BoundaryMesh:
        if self._boundary is None:
            self._boundary = self._build_boundary()
        return self._boundary

    def _build_boundary(self) -> BoundaryMesh:
        g = self.grid
        h = g.h
        planes = self.shape.artificial_planes() if self.shape is not None else []
        anchors, axes, signs = [], [], []
        n_art = 0
        for axis in range(self.dim):
            for sign in (-1, +1):
                shifted = np.zeros_like(self.mask)
                src = [slice(None)] * self.dim
                dst = [slice(None)] * self.dim
                if sign > 0:
                    src[axis] = slice(1, None)
                    dst[axis] = slice(0, -1)
                else:
                    src[axis] = slice(0, -1)
                    dst[axis] = slice(1, None)
                shifted[tuple(dst)] = self.mask[tuple(src)]
                faces = self.mask & ~shifted
                cells = np.argwhere(faces)
                if cells.size == 0:
                    continue
                pos_axis = (g.origin[axis] + h * cells[:, axis]
                            + sign * h / 2.0)
                keep = np.ones(cells.shape[0], dtype=bool)
                for p_axis, p_side, p_coord in planes:
                    if p_axis == axis and p_side == sign:
                        keep &= np.abs(pos_axis - p_coord) > h / 4.0
                n_art += int((~keep).sum())
                cells = cells[keep]
                if cells.size == 0:
                    continue
                anchors.append(cells)
                axes.append(np.full(cells.shape[0], axis, dtype=np.int8))
                signs.append(np.full(cells.shape[0], sign, dtype=np.int8))
        if not anchors:
            empty = np.empty((0, self.dim))
            return BoundaryMesh(empty, empty, np.empty(0), np.empty((0, self.dim), np.int64),
                                np.empty(0, np.int8), np.empty(0, np.int8),
                                np.empty(0, np.int32), {}, n_art)
        anchors_a = np.ascontiguousarray(np.concatenate(anchors), dtype=np.int64)
        axes_a = np.concatenate(axes)
        signs_a = np.concatenate(signs)
        positions = self.grid.world(anchors_a)
        rows = np.arange(positions.shape[0])
        positions[rows, axes_a] += signs_a * h / 2.0

        if self.shape is not None:
            normals = self.shape.normal(positions)
        else:
            normals = np.zeros_like(positions)
            normals[rows, axes_a] = signs_a
        weights = h ** (self.dim - 1) * np.abs(normals[rows, axes_a])

        comp = _connected_components(positions, h)

        slices = {}
        start = 0
        for axis in range(self.dim):
            for sign in (-1, +1):
                count = int(((axes_a == axis) & (signs_a == sign)).sum())
                if count:
                    slices[(axis, sign)] = slice(start, start + count)
                start += count
        return BoundaryMesh(positions, normals, weights, anchors_a,
                            axes_a, signs_a, comp, slices, n_art)

    # -- distance field ---------------------------------------------------

    @property
    def dist(self) -> DistanceField:
        if self._dist is None:
            self._dist = self._build_dist()
        return self._dist

    def _build_dist(self) -> DistanceField:
        g = self.grid
        h = g.h
        bnd = self.boundary
        centers = g.centers()
        if bnd.count == 0:
            values = np.full(g.shape, np.inf)
            grad = np.full((self.dim,) + g.shape, np.nan)
            reliable = np.zeros(g.shape, dtype=bool)
            return DistanceField(values, grad, reliable, float("inf"),
                                 np.zeros(g.shape, dtype=np.int64))
        tree = cKDTree(bnd.positions)
        _, idx = tree.query(centers)
        diff = centers - bnd.positions[idx]
        values = np.sqrt((diff * diff).sum(axis=1)).reshape(g.shape)
        nearest = idx.reshape(g.shape)

        # reliability: ambiguous cells see near-minimizers from separated
        # boundary patches (discrete cut locus); detected from the k
        # nearest interface points
        k = min(8, bnd.count)
        dists_k, idx_k = tree.query(centers, k=k)
        if k == 1:
            dists_k = dists_k[:, None]
            idx_k = idx_k[:, None]
        near = dists_k <= dists_k[:, 0:1] + h / 2.0
        pos_k = bnd.positions[idx_k]
        spread = np.sqrt(((pos_k - pos_k[:, 0:1, :]) ** 2).sum(axis=2))
        spread = np.where(near, spread, 0.0)
        # near-minimizers on one smooth patch spread by the staircase
        # width ~2*sqrt(d*h); separated patches spread by ~2d, so a
        # sqrt(d*h)-scaled threshold splits the two regimes
        cut = np.maximum(3.0 * h, 4.0 * np.sqrt(dists_k[:, 0] * h))
        ambiguous = (spread.max(axis=1) > cut).reshape(g.shape)
        reliable = ~ambiguous

        amb_inside = ambiguous & self.mask
        if amb_inside.any():
            reach = max(float(values[amb_inside].min()), h)
        else:
            inside_vals = values[self.mask]
            reach = float(inside_vals.max()) if inside_vals.size else h

        grad = self._fd_gradient(values)
        analytic = self.shape is not None
        values_analytic = None
        if analytic:
            values_analytic = self.shape.gamma_distance(centers).reshape(g.shape)
        return DistanceField(values, grad, reliable, reach, nearest,
                             analytic, values_analytic)

    def _fd_gradient(self, values: np.ndarray) -> np.ndarray:
        """Unit gradient of the distance on mask cells; central where
        both neighbors are inside, one-sided at the interface."""
        h = self.h
        nd = self.dim
        grad = np.full((nd,) + self.grid.shape, np.nan)
        m = self.mask
        for k in range(nd):
            plus = np.zeros_like(m)
            minus = np.zeros_like(m)
            vp = np.zeros_like(values)
            vm = np.zeros_like(values)
            src = [slice(None)] * nd
            dst = [slice(None)] * nd
            src[k] = slice(1, None)
            dst[k] = slice(0, -1)
            plus[tuple(dst)] = m[tuple(src)]
            vp[tuple(dst)] = values[tuple(src)]
            src[k] = slice(0, -1)
            dst[k] = slice(1, None)
            minus[tuple(dst)] = m[tuple(src)]
            vm[tuple(dst)] = values[tuple(src)]
            comp = np.full(self.grid.shape, np.nan)
            both = plus & minus
            comp[both] = (vp[both] - vm[both]) / (2 * h)
            only_p = plus & ~minus
            comp[only_p] = (vp[only_p] - values[only_p]) / h
            only_m = minus & ~plus
            comp[only_m] = (values[only_m] - vm[only_m]) / h
            grad[k] = comp
        norm = np.sqrt((grad ** 2).sum(axis=0))
        with np.errstate(invalid="ignore"):
            ok = norm > 1e-12
        grad = np.where(ok & self.mask, grad / np.where(ok, norm, 1.0), np.nan)
        return grad

    def grad_analytic(self, pts: np.ndarray) -> np.ndarray:
        """Exact distance gradient -n(projection); needs a shape."""
        if self.shape is None:
            raise ValueError("no analytic shape attached")
        return -self.shape.normal(pts)

    @property
    def grad_field(self) -> np.ndarray:
        """Analytic distance gradient at every cell center, cached;
        shape (dim, *grid.shape)."""
        if self._grad_field is None:
            g = self.grid
            vals = self.grad_analytic(g.centers())
            self._grad_field = vals.T.reshape((g.dim,) + g.shape)
        return self._grad_field

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_mask(cls, grid: Grid, mask: np.ndarray, name: str = "mask-domain"):
        return cls(grid, mask, shape=None, name=name)


def build_domain(shape, h: float, margin_cells: int = 2,
                 phase: tuple[float, ...] | None = None,
                 name: str | None = None) -> GridDomain:
    """Rasterize a shape (or a {"type", "params"} spec) at spacing h.

    phase gives per-axis cell-center offsets in units of h (default 0.5:
    cell boundaries on the h-lattice).  A resolution guard rejects
    shapes whose smallest feature is below 4h.
    """
    from .shapes import shape_from_spec

    if isinstance(shape, dict):
        nm = shape.get("type", "domain")
        shape = shape_from_spec(shape)
        name = name or nm
    if h <= 0:
        raise ValueError("spacing must be positive")
    if not shape.feature_exempt and shape.min_feature < 4 * h:
        raise DomainResolutionError(
            f"feature {shape.min_feature:g} below 4h = {4 * h:g}")
    lo, hi = shape.bbox()
    nd = shape.dim
    ph = tuple(0.5 for _ in range(nd)) if phase is None else tuple(phase)
    shape_counts = []
    origin = []
    for k in range(nd):
        lo_k = lo[k] - margin_cells * h
        hi_k = hi[k] + margin_cells * h
        span = hi_k - lo_k
        n = int(round(span / h))
        if abs(ph[k]) < 1e-12:
            n += 1
        shape_counts.append(n)
        origin.append(lo_k + ph[k] * h)
    grid = Grid(tuple(shape_counts), float(h), tuple(origin))
    mask = shape.contains(grid.centers()).reshape(grid.shape)
    if not mask.any():
        raise ValueError("shape rasterized to an empty mask")
    return GridDomain(grid, mask, shape, name or type(shape).__name__.lower())


def tubular_neighborhood(dom: GridDomain, delta: float) -> np.ndarray:
    """Mask of occupied cells within distance delta of the interface."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return dom.mask & (dom.dist.values < delta)


def nearest_point_projection(dom: GridDomain, pts: np.ndarray) -> np.ndarray:
    """Project points onto the discrete interface (nearest midpoint).

    Raises AmbiguousProjectionError when a query sees near-minimizers
    from separated boundary patches, carrying those witness sets.
    """
    bnd = dom.boundary
    if bnd.count == 0:
        raise ValueError("domain has no interface")
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    tree = cKDTree(bnd.positions)
    d, idx = tree.query(pts)
    h = dom.h
    witnesses = []
    for i in range(pts.shape[0]):
        near = tree.query_ball_point(pts[i], d[i] + h / 2.0)
        near_pos = bnd.positions[near]
        if len(near) > 1:
            spread = np.sqrt(((near_pos - near_pos[0]) ** 2).sum(axis=1)).max()
            if spread > 3.0 * h:
                witnesses.append((pts[i], near_pos))
    if witnesses:
        raise AmbiguousProjectionError(
            f"{len(witnesses)} of {pts.shape[0]} queries have ambiguous projections",
            witnesses)
    return bnd.positions[idx]
