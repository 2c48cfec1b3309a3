"""Voronoi tessellation of p-vectors clipped to the unit square.

Each cell is built independently: start from the unit square and intersect
it with the bisector half-planes of the other sites, nearest first, until
the remaining sites are provably too far away to cut the cell.  Neighbour
candidates come from a k-d tree; a cell that is not closed off by its
``k`` nearest neighbours falls back to a full distance sort.

Per-cell clipping keeps every area a sum of well-conditioned terms even
when sites cluster at very different scales (alternative p-vectors pile
up within 1e-10 of the origin while null ones spread over the square),
which is where lifted-paraboloid Delaunay codes lose sites to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np
from scipy.spatial import cKDTree

from .errors import DuplicatePoints, EmptyInput, OutOfDomain

#: Relative tolerance of the side-of-bisector predicate.
PREDICATE_EPS = 1e-12
#: Half-width of the uniform jitter applied to duplicated coordinates.
JITTER_SCALE = 1e-12

_NEIGHBOURS = 24


@dataclass(frozen=True)
class PVector:
    """One hypothesis' component p-values."""

    id: str
    coords: tuple[float, ...]

    def __post_init__(self):
        for c in self.coords:
            if not (0.0 <= c <= 1.0):
                raise OutOfDomain(f"p-vector {self.id!r}: coordinate {c!r} outside [0, 1]")

    @property
    def dims(self) -> int:
        return len(self.coords)


def as_points(points, dims: int | None = None) -> np.ndarray:
    """Coerce a sequence of PVectors or an array-like to a float (m, d) array.

    Validates emptiness, dimension and the [0, 1] domain.
    """
    if len(points) == 0:
        raise EmptyInput("no points given")
    if isinstance(points[0], PVector):
        arr = np.array([p.coords for p in points], dtype=float)
    else:
        arr = np.array(points, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d array of points, got shape {arr.shape}")
    if dims is not None and arr.shape[1] != dims:
        raise ValueError(f"expected {dims}-dimensional points, got {arr.shape[1]}")
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise OutOfDomain(
            f"point {row}: coordinate {col + 1} = {arr[row, col]!r} outside [0, 1]"
        )
    return arr


@dataclass(frozen=True)
class Cell:
    index: int
    polygon: np.ndarray  # (k, 2), counterclockwise
    area: float


@dataclass(frozen=True)
class Tessellation:
    """Voronoi cells of ``points`` restricted to the unit square.

    Vertices of all cells are stored back to back; cell ``i`` owns rows
    ``offsets[i]:offsets[i + 1]`` of ``vertices``.
    """

    points: np.ndarray
    vertices: np.ndarray
    offsets: np.ndarray
    areas: np.ndarray
    jittered: bool = False
    jittered_indices: tuple[int, ...] = field(default=())

    def __len__(self) -> int:
        return len(self.areas)

    def polygon(self, i: int) -> np.ndarray:
        return self.vertices[self.offsets[i] : self.offsets[i + 1]]

    @property
    def cells(self) -> list[Cell]:
        return [Cell(i, self.polygon(i), float(self.areas[i])) for i in range(len(self))]


@numba.njit(cache=True)
def _clip(px, py, n, ax, ay, b, tol, ox, oy):
    # Sutherland-Hodgman step keeping {v : a.v <= b}.
    m = 0
    for k in range(n):
        j = k - 1 if k > 0 else n - 1
        sa = ax * px[j] + ay * py[j] - b
        sb = ax * px[k] + ay * py[k] - b
        if sb <= tol:
            if sa > tol:
                t = sa / (sa - sb)
                ox[m] = px[j] + t * (px[k] - px[j])
                oy[m] = py[j] + t * (py[k] - py[j])
                m += 1
            ox[m] = px[k]
            oy[m] = py[k]
            m += 1
        elif sa <= tol:
            t = sa / (sa - sb)
            ox[m] = px[j] + t * (px[k] - px[j])
            oy[m] = py[j] + t * (py[k] - py[j])
            m += 1
    return m


@numba.njit(cache=True)
def _build_cell(pts, i, order, px, py, qx, qy):
    px[0] = 0.0
    py[0] = 0.0
    px[1] = 1.0
    py[1] = 0.0
    px[2] = 1.0
    py[2] = 1.0
    px[3] = 0.0
    py[3] = 1.0
    n = 4
    xi = pts[i, 0]
    yi = pts[i, 1]
    for idx in range(order.shape[0]):
        j = order[idx]
        if j == i:
            continue
        dx = pts[j, 0] - xi
        dy = pts[j, 1] - yi
        d2 = dx * dx + dy * dy
        r2 = 0.0
        for k in range(n):
            ex = px[k] - xi
            ey = py[k] - yi
            e = ex * ex + ey * ey
            if e > r2:
                r2 = e
        # every remaining bisector lies beyond the cell's farthest vertex
        if d2 >= 4.0 * r2:
            return n, True
        b = dx * (xi + 0.5 * dx) + dy * (yi + 0.5 * dy)
        n = _clip(px, py, n, dx, dy, b, 1e-12 * d2, qx, qy)
        for k in range(n):
            px[k] = qx[k]
            py[k] = qy[k]
    return n, order.shape[0] >= pts.shape[0]


@numba.njit(cache=True)
def _tessellate(pts, nbr):
    m = pts.shape[0]
    cap = m + 8
    px = np.empty(cap)
    py = np.empty(cap)
    qx = np.empty(cap)
    qy = np.empty(cap)
    vx = np.empty(8 * m + 16)
    vy = np.empty(8 * m + 16)
    offsets = np.zeros(m + 1, np.int64)
    areas = np.empty(m)
    for i in range(m):
        n, done = _build_cell(pts, i, nbr[i], px, py, qx, qy)
        if not done:
            d = (pts[:, 0] - pts[i, 0]) ** 2 + (pts[:, 1] - pts[i, 1]) ** 2
            n, done = _build_cell(pts, i, np.argsort(d, kind="mergesort"), px, py, qx, qy)
        a = 0.0
        for k in range(n):
            j = k - 1 if k > 0 else n - 1
            a += px[j] * py[k] - px[k] * py[j]
        areas[i] = 0.5 * a
        start = offsets[i]
        if start + n > vx.shape[0]:
            grow = max(vx.shape[0], n)
            vx = np.concatenate((vx, np.empty(grow)))
            vy = np.concatenate((vy, np.empty(grow)))
        for k in range(n):
            vx[start + k] = px[k]
            vy[start + k] = py[k]
        offsets[i + 1] = start + n
    total = offsets[m]
    return vx[:total].copy(), vy[:total].copy(), offsets, areas


def _duplicate_mask(pts: np.ndarray) -> np.ndarray:
    """True for every row that repeats an earlier row exactly."""
    _, first = np.unique(pts, axis=0, return_index=True)
    mask = np.ones(len(pts), dtype=bool)
    mask[first] = False
    return mask


def jitter_duplicates(pts: np.ndarray, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Perturb repeated rows by at most ``JITTER_SCALE`` per coordinate.

    The first occurrence of each point is left untouched.  Returns the new
    array and the indices that were moved.
    """
    pts = pts.copy()
    rng = np.random.default_rng(seed)
    moved: set[int] = set()
    dup = _duplicate_mask(pts)
    while dup.any():
        idx = np.flatnonzero(dup)
        moved.update(idx.tolist())
        pts[idx] += rng.uniform(-JITTER_SCALE, JITTER_SCALE, size=(len(idx), pts.shape[1]))
        np.clip(pts, 0.0, 1.0, out=pts)
        dup = _duplicate_mask(pts)
    return pts, np.array(sorted(moved), dtype=np.int64)


def voronoi_tessellate(points, jitter: bool = False, seed: int = 0) -> Tessellation:
    """Tessellate the unit square by nearest input point.

    Parameters
    ----------
    points : sequence of PVector or array-like, shape (m, 2)
        Sites, every coordinate in [0, 1].
    jitter : bool
        Break exact duplicates with a seeded perturbation of magnitude
        ``JITTER_SCALE`` instead of raising ``DuplicatePoints``.
    seed : int
        Seed of the jitter stream.

    Returns
    -------
    Tessellation
        Cells in input order.  Areas sum to one up to round-off.
    """
    pts = as_points(points, dims=2)
    moved = np.empty(0, dtype=np.int64)
    dup = _duplicate_mask(pts)
    if dup.any():
        if not jitter:
            first = int(np.flatnonzero(dup)[0])
            raise DuplicatePoints(
                f"point {first} duplicates an earlier point at {tuple(pts[first])}"
            )
        pts, moved = jitter_duplicates(pts, seed)
    pts = np.ascontiguousarray(pts)
    k = min(_NEIGHBOURS, len(pts))
    _, nbr = cKDTree(pts).query(pts, k=k)
    nbr = np.ascontiguousarray(np.asarray(nbr, dtype=np.int64).reshape(len(pts), k))
    vx, vy, offsets, areas = _tessellate(pts, nbr)
    return Tessellation(
        points=pts,
        vertices=np.column_stack((vx, vy)),
        offsets=offsets,
        areas=areas,
        jittered=bool(len(moved)),
        jittered_indices=tuple(moved.tolist()),
    )


def cell_areas(t: Tessellation) -> np.ndarray:
    """Cell areas in input order."""
    return t.areas.copy()


def tessellation_areas(points, jitter: bool = False, seed: int = 0) -> np.ndarray:
    return voronoi_tessellate(points, jitter=jitter, seed=seed).areas
