"""Voronoi-area combination of p-vectors for testing the disjunction hypothesis.

A hypothesis is rejected only when every component of its p-vector shows
evidence against the null.  P-vectors are ranked by distance from the
origin, the unit square is tessellated by nearest p-vector, and cumulative
cell areas in rank order act as combined p-values for BH, spacings-BH or
empirical-null inference.
"""

__version__ = "0.1.0"

from .errors import VoronoiFdrError  # noqa: E402
from .geometry import PVector, Tessellation, cell_areas, voronoi_tessellate  # noqa: E402
from .ordering import OrderingScheme, Ranking, distance, rank_pvectors  # noqa: E402
from .pipeline import (  # noqa: E402
    CombinedRecord,
    combine,
    combined_values,
    cumulative_areas,
    probit_transform,
)
from .mtp import DecisionSet, bh_reject, leftfdr_reject, spacings_bh  # noqa: E402
from .empnull import MixtureFit, fit_mixture, left_tail_fdr, local_fdr  # noqa: E402
from .highdim import PairwiseAreas, combine3, pairwise_average_areas  # noqa: E402
from .periodicity import TimeCourse, fisher_g  # noqa: E402

__all__ = [
    "VoronoiFdrError",
    "PVector", "Tessellation", "voronoi_tessellate", "cell_areas",
    "OrderingScheme", "Ranking", "distance", "rank_pvectors",
    "CombinedRecord", "combine", "combined_values", "cumulative_areas", "probit_transform",
    "DecisionSet", "bh_reject", "spacings_bh", "leftfdr_reject",
    "MixtureFit", "fit_mixture", "local_fdr", "left_tail_fdr",
    "PairwiseAreas", "pairwise_average_areas", "combine3",
    "TimeCourse", "fisher_g",
]
