"""Fisher's exact G test for a dominant periodic component."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import ConstantSeries, InputError, TooShort

MIN_LENGTH = 4
# Largest alternating-series term the double-precision path accepts
# before switching to multiprecision; keeps cancellation error below 1e-12.
_FLOAT_TERM_LIMIT = 1e2


@dataclass(frozen=True)
class TimeCourse:
    gene_id: str
    values: np.ndarray
    spacing: float | None = None  # minutes; metadata only

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < MIN_LENGTH:
            raise TooShort(f"{self.gene_id}: need at least {MIN_LENGTH} time points, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise InputError(f"{self.gene_id}: missing or non-finite measurements")
        object.__setattr__(self, "values", v)


def periodogram(values) -> np.ndarray:
    """Ordinates at Fourier frequencies 2 pi k / n, k = 1 .. floor((n - 1) / 2)."""
    x = np.asarray(values, dtype=float)
    n = x.size
    q = (n - 1) // 2
    spec = np.fft.rfft(x - x.mean())
    return (np.abs(spec[1 : q + 1]) ** 2) / n


def g_pvalue(g: float, q: int) -> float:
    """P(G > g) for q i.i.d. exponential ordinates (white noise)."""
    if q < 1:
        raise TooShort("need at least one Fourier ordinate")
    if g <= 0.0:
        return 1.0
    if g >= 1.0:
        return 0.0
    top = min(q, int(math.floor(1.0 / g)))
    while top >= 1 and 1.0 - top * g <= 0.0:
        top -= 1
    if top < 1:
        return 0.0
    log_mags = [_log_term(g, q, j) for j in range(1, top + 1)]
    if max(log_mags) > math.log(_FLOAT_TERM_LIMIT):
        p = _g_pvalue_mp(g, q, top, max(log_mags))
    else:
        terms = [math.comb(q, j) * (1.0 - j * g) ** (q - 1) for j in range(1, top + 1)]
        terms = [t if j % 2 else -t for j, t in enumerate(terms, start=1)]
        terms.sort(key=abs, reverse=True)
        p = math.fsum(terms)
    return min(max(p, 0.0), 1.0)


def _log_term(g: float, q: int, j: int) -> float:
    return (math.lgamma(q + 1) - math.lgamma(j + 1) - math.lgamma(q - j + 1)
            + (q - 1) * math.log(1.0 - j * g))


def _g_pvalue_mp(g: float, q: int, top: int, biggest: float) -> float:
    with mpmath.workdps(30 + int(biggest / math.log(10))):
        gm = mpmath.mpf(g)
        total = mpmath.mpf(0)
        for j in range(1, top + 1):
            base = 1 - j * gm
            if base <= 0:
                break
            term = mpmath.binomial(q, j) * base ** (q - 1)
            total += term if j % 2 else -term
        return float(total)


def fisher_g(series) -> tuple[float, float]:
    """Return ``(g, p)`` for a :class:`TimeCourse` or a 1-d array.

    ``g`` is the largest periodogram ordinate over their sum; ``p`` is its
    exact upper-tail probability under Gaussian white noise.
    """
    if not isinstance(series, TimeCourse):
        series = TimeCourse("series", series)
    ordinates = periodogram(series.values)
    total = ordinates.sum()
    scale = float(np.sum(series.values**2)) or 1.0
    if total <= 1e-24 * scale or total == 0.0:
        raise ConstantSeries(f"{series.gene_id}: series has no variation")
    g = float(ordinates.max() / total)
    return g, g_pvalue(g, ordinates.size)
