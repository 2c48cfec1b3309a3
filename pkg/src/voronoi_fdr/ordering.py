"""Distance-from-origin ordering schemes for p-vectors."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, UnsupportedScheme
from .geometry import as_points

#: Scale of the de Lichtenberg single-component penalty.
LICHTENBERG_SCALE = 0.001


class OrderingScheme(str, Enum):
    EUCLIDEAN = "euclidean"
    MAXIMUM = "maximum"
    SUMMATION = "summation"
    DELICHTENBERG = "delichtenberg"

    @classmethod
    def parse(cls, value) -> "OrderingScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "").replace("_", ""))
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ConfigError(f"unknown ordering scheme {value!r}; choose one of {names}") from None

    @property
    def concave(self) -> bool:
        return self is not OrderingScheme.DELICHTENBERG


DEFAULT_SCHEME = OrderingScheme.SUMMATION


@dataclass(frozen=True)
class Ranking:
    """``order[r]`` is the input index holding rank ``r + 1``."""

    order: np.ndarray
    scores: np.ndarray

    @property
    def ranks(self) -> np.ndarray:
        ranks = np.empty(len(self.order), dtype=np.int64)
        ranks[self.order] = np.arange(1, len(self.order) + 1)
        return ranks


def distances(scheme, points) -> np.ndarray:
    """Vectorised distance of every row of ``points`` from the origin."""
    scheme = OrderingScheme.parse(scheme)
    p = as_points(points)
    if scheme is OrderingScheme.EUCLIDEAN:
        return np.sqrt(np.sum(p * p, axis=1))
    if scheme is OrderingScheme.MAXIMUM:
        return p.max(axis=1)
    if scheme is OrderingScheme.SUMMATION:
        return p.sum(axis=1)
    if p.shape[1] != 2:
        raise UnsupportedScheme("de Lichtenberg ordering is only defined for 2-d p-vectors")
    p1, p2 = p[:, 0], p[:, 1]
    return p1 * p2 * (1.0 + (p1 / LICHTENBERG_SCALE) ** 2) * (1.0 + (p2 / LICHTENBERG_SCALE) ** 2)


def distance(scheme, p) -> float:
    coords = p.coords if hasattr(p, "coords") else p
    return float(distances(scheme, [coords])[0])


def rank_pvectors(scheme, points) -> Ranking:
    """Rank by increasing distance.

    Ties are broken by the first coordinate, then the second, then by
    input position, so the ranking is a deterministic function of the input.
    """
    p = as_points(points)
    scores = distances(scheme, p)
    keys = [np.arange(len(p))] + [p[:, c] for c in range(p.shape[1] - 1, -1, -1)] + [scores]
    return Ranking(order=np.lexsort(keys), scores=scores)
