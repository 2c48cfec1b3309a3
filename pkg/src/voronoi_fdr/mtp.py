"""Step-up multiple testing rules on combined p-values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingEstimates, OutOfDomain


@dataclass(frozen=True)
class DecisionSet:
    rejected: np.ndarray  # input indices, in increasing p-value order
    m: int
    alpha: float
    rule: str

    @property
    def k(self) -> int:
        return len(self.rejected)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.m, dtype=bool)
        out[self.rejected] = True
        return out


def _check(pvalues, alpha) -> np.ndarray:
    p = np.asarray(pvalues, dtype=float).ravel()
    if not (0.0 < alpha < 1.0):
        raise OutOfDomain(f"alpha must lie in (0, 1), got {alpha!r}")
    if p.size and not np.all((p >= 0.0) & (p <= 1.0)):
        raise OutOfDomain("p-values must lie in [0, 1]")
    return p


def _step_up(p: np.ndarray, thresholds: np.ndarray) -> tuple[np.ndarray, int]:
    order = np.argsort(p, kind="stable")
    below = np.flatnonzero(p[order] <= thresholds)
    k = int(below[-1]) + 1 if below.size else 0
    return order[:k], k


def bh_reject(pvalues, alpha: float = 0.05) -> DecisionSet:
    """Benjamini-Hochberg: reject the k smallest, k = max{i : p_(i) <= i alpha / m}."""
    p = _check(pvalues, alpha)
    m = p.size
    rejected, _ = _step_up(p, alpha * np.arange(1, m + 1) / m)
    return DecisionSet(rejected, m, alpha, "bh")


def spacings_bh(pvalues, alpha: float = 0.05) -> DecisionSet:
    """Spacings form of BH without the (m+1)/m factor.

    The mean of the first i spacings of the ordered p-values is compared
    with ``alpha`` times the expected null spacing 1/(m+1).  The mean of
    the first i spacings telescopes to p_(i) / i, so this is a step-up
    rule with thresholds i alpha / (m + 1).
    """
    p = _check(pvalues, alpha)
    m = p.size
    order = np.argsort(p, kind="stable")
    spacings = np.diff(p[order], prepend=0.0)
    running_mean = np.cumsum(spacings) / np.arange(1, m + 1)
    below = np.flatnonzero(running_mean <= alpha / (m + 1))
    k = int(below[-1]) + 1 if below.size else 0
    return DecisionSet(order[:k], m, alpha, "spacings-bh")


def leftfdr_reject(left_fdr, cutoff: float = 0.05) -> DecisionSet:
    """Reject every hypothesis whose estimated left-tail FDR is below ``cutoff``.

    ``left_fdr`` is either an array of estimates or a sequence of records
    with a ``left_fdr`` attribute.
    """
    if len(left_fdr) and hasattr(left_fdr[0], "left_fdr"):
        values = [r.left_fdr for r in left_fdr]
    else:
        values = list(np.asarray(left_fdr, dtype=object).ravel())
    if any(v is None for v in values):
        raise MissingEstimates("left-tail FDR estimates are missing for some records")
    est = np.asarray(values, dtype=float)
    if np.isnan(est).any():
        raise MissingEstimates("left-tail FDR estimates are missing for some records")
    order = np.argsort(est, kind="stable")
    rejected = order[est[order] < cutoff]
    return DecisionSet(rejected, est.size, cutoff, "empirical-null")
