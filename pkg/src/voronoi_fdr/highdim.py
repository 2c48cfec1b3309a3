"""Three-component p-vectors via averaged pairwise Voronoi areas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DuplicatePoints, TooFewPoints, UnsupportedScheme
from .geometry import as_points, voronoi_tessellate
from .ordering import OrderingScheme
from .pipeline import Combination, CombinedRecord, combine_areas, to_records

PROJECTIONS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class PairwiseAreas:
    areas_12: np.ndarray
    areas_13: np.ndarray
    areas_23: np.ndarray
    jittered: bool = False

    @property
    def mean(self) -> np.ndarray:
        return (self.areas_12 + self.areas_13 + self.areas_23) / 3.0


def pairwise_average_areas(points, jitter: bool = False, seed: int = 0) -> PairwiseAreas:
    pts = as_points(points, dims=3)
    if len(pts) < 2:
        raise TooFewPoints("need at least two p-vectors")
    tessellations = []
    for a, b in PROJECTIONS:
        try:
            tessellations.append(
                voronoi_tessellate(pts[:, [a, b]], jitter=jitter, seed=seed)
            )
        except DuplicatePoints as exc:
            raise DuplicatePoints(f"projection ({a + 1},{b + 1}): {exc}") from None
    return PairwiseAreas(
        *(t.areas for t in tessellations),
        jittered=any(t.jittered for t in tessellations),
    )


def combined_values3(points, scheme=OrderingScheme.EUCLIDEAN, jitter: bool = False,
                     seed: int = 0) -> Combination:
    scheme = OrderingScheme.parse(scheme)
    if scheme is OrderingScheme.DELICHTENBERG:
        raise UnsupportedScheme("de Lichtenberg ordering has no 3-d form")
    pts = as_points(points, dims=3)
    pair = pairwise_average_areas(pts, jitter=jitter, seed=seed)
    return combine_areas(pts, pair.mean, scheme, jittered=pair.jittered)


def combine3(points, scheme=OrderingScheme.EUCLIDEAN, ids: Sequence[str] | None = None,
             jitter: bool = False, seed: int = 0) -> list[CombinedRecord]:
    if ids is None and len(points) and hasattr(points[0], "id"):
        ids = [p.id for p in points]
    return to_records(combined_values3(points, scheme, jitter=jitter, seed=seed), ids)
