"""Cumulative Voronoi areas as combined p-values, and their probit transform."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .errors import AreaSumMismatch, NonPositiveArea, OutOfDomain, TooFewPoints
from .geometry import as_points, voronoi_tessellate
from .ordering import DEFAULT_SCHEME, rank_pvectors

#: T is clamped to [PROBIT_CLAMP, 1 - PROBIT_CLAMP] before the probit.
PROBIT_CLAMP = 1e-12
AREA_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CombinedRecord:
    id: str
    coords: tuple[float, ...]
    rank: int
    area: float
    T: float
    Z: float
    fdr: float | None = None
    left_fdr: float | None = None
    reject: bool | None = None


@dataclass(frozen=True)
class Combination:
    """Array view of a combination, every array indexed by input position."""

    points: np.ndarray
    order: np.ndarray
    areas: np.ndarray
    T: np.ndarray
    Z: np.ndarray
    jittered: bool = False

    @property
    def ranks(self) -> np.ndarray:
        ranks = np.empty(len(self.order), dtype=np.int64)
        ranks[self.order] = np.arange(1, len(self.order) + 1)
        return ranks


def cumulative_areas(areas_in_rank_order) -> np.ndarray:
    a = np.asarray(areas_in_rank_order, dtype=float)
    if a.size == 0 or np.any(~(a > 0.0)):
        raise NonPositiveArea("every cell area must be positive")
    T = np.cumsum(a)
    if abs(T[-1] - 1.0) > AREA_SUM_TOL:
        raise AreaSumMismatch(f"areas sum to {T[-1]!r}, expected 1")
    # round-off may push the tail a few ulps past 1
    return np.minimum(T, 1.0)


def probit_transform(T) -> np.ndarray:
    """Standard normal quantiles of clamped cumulative areas."""
    t = np.asarray(T, dtype=float)
    if np.any(~(t > 0.0)) or np.any(t > 1.0 + AREA_SUM_TOL):
        raise OutOfDomain("cumulative areas must lie in (0, 1]")
    return ndtri(np.clip(t, PROBIT_CLAMP, 1.0 - PROBIT_CLAMP))


def combine_areas(points, areas, scheme=DEFAULT_SCHEME, jittered: bool = False) -> Combination:
    """Rank ``points`` and accumulate the given per-point ``areas`` in rank order."""
    ranking = rank_pvectors(scheme, points)
    order = ranking.order
    areas = np.asarray(areas, dtype=float)
    T_sorted = cumulative_areas(areas[order])
    T = np.empty_like(T_sorted)
    T[order] = T_sorted
    return Combination(
        points=np.asarray(points, dtype=float),
        order=order,
        areas=areas,
        T=T,
        Z=probit_transform(T),
        jittered=jittered,
    )


def combined_values(points, scheme=DEFAULT_SCHEME, jitter: bool = False, seed: int = 0) -> Combination:
    pts = as_points(points, dims=2)
    if len(pts) < 2:
        raise TooFewPoints("need at least two p-vectors to combine")
    tess = voronoi_tessellate(pts, jitter=jitter, seed=seed)
    return combine_areas(pts, tess.areas, scheme, jittered=tess.jittered)


def to_records(c: Combination, ids: Sequence[str] | None = None) -> list[CombinedRecord]:
    """Per-hypothesis records in rank order."""
    if ids is None:
        ids = [str(i) for i in range(len(c.order))]
    ranks = c.ranks
    return [
        CombinedRecord(
            id=ids[i],
            coords=tuple(float(x) for x in c.points[i]),
            rank=int(ranks[i]),
            area=float(c.areas[i]),
            T=float(c.T[i]),
            Z=float(c.Z[i]),
        )
        for i in c.order
    ]


def combine(points, scheme=DEFAULT_SCHEME, ids: Sequence[str] | None = None,
            jitter: bool = False, seed: int = 0) -> list[CombinedRecord]:
    """Rank, tessellate, accumulate and probit-transform 2-d p-vectors.

    ``points`` may be PVectors, in which case their ids are used.
    """
    if ids is None and len(points) and hasattr(points[0], "id"):
        ids = [p.id for p in points]
    return to_records(combined_values(points, scheme, jitter=jitter, seed=seed), ids)


def annotate(records: list[CombinedRecord], fdr=None, left_fdr=None, reject=None) -> list[CombinedRecord]:
    """Attach decision fields; each argument is aligned with ``records``."""
    out = []
    for k, r in enumerate(records):
        out.append(replace(
            r,
            fdr=r.fdr if fdr is None else float(fdr[k]),
            left_fdr=r.left_fdr if left_fdr is None else float(left_fdr[k]),
            reject=r.reject if reject is None else bool(reject[k]),
        ))
    return out
