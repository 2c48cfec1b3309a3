"""End-to-end analysis of a p-vector table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .empnull import MixtureFit, fit_mixture, left_tail_fdr, local_fdr
from .errors import ConfigError
from .geometry import PVector
from .highdim import combined_values3
from .mtp import DecisionSet, bh_reject, leftfdr_reject, spacings_bh
from .ordering import DEFAULT_SCHEME, OrderingScheme
from .pipeline import CombinedRecord, annotate, combined_values, to_records

ANALYSIS_METHODS = ("bh", "spacings-bh", "empirical-null")


@dataclass
class AnalysisReport:
    metadata: dict
    records: list[CombinedRecord]  # rank order
    decision: DecisionSet
    fit: MixtureFit | None = None
    jittered: bool = False

    def header(self, timestamp: str | None = None) -> dict:
        """Header block for the saved table; ``timestamp`` is the only
        field that differs between identical invocations."""
        h = {"voronoi-fdr report": __version__}
        if timestamp is not None:
            h["timestamp"] = timestamp
        h.update(self.metadata)
        h["jittered"] = str(self.jittered).lower()
        if self.fit is not None:
            f = self.fit
            h["mixture"] = (
                f"J={f.J} P={f.penalty!r} null_index={f.null_index} "
                f"iterations={f.iterations} converged={str(f.converged).lower()} "
                f"loglik={f.loglik!r}"
            )
            h["mixture_weights"] = " ".join(repr(float(x)) for x in f.weights)
            h["mixture_means"] = " ".join(repr(float(x)) for x in f.means)
            h["mixture_scales"] = " ".join(repr(float(x)) for x in f.scales)
        h["rule"] = self.decision.rule
        h["level"] = repr(self.decision.alpha)
        h["rejections"] = str(self.decision.k)
        h["hypotheses"] = str(len(self.records))
        return h


def analyze(pvectors: list[PVector], scheme=DEFAULT_SCHEME, method: str = "bh",
            alpha: float = 0.05, fdr_cutoff: float = 0.05, null_j: int = 2,
            null_p: float | None = None, seed: int = 0, jitter: bool = False,
            source: str | None = None) -> AnalysisReport:
    """Combine p-vectors and apply one decision rule.

    ``null_p`` defaults to a quarter of the number of hypotheses.
    """
    scheme = OrderingScheme.parse(scheme)
    if method not in ANALYSIS_METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {ANALYSIS_METHODS}")
    dims = pvectors[0].dims if pvectors else 2
    ids = [p.id for p in pvectors]
    if dims == 3:
        comb = combined_values3(pvectors, scheme, jitter=jitter, seed=seed)
    elif dims == 2:
        comb = combined_values(pvectors, scheme, jitter=jitter, seed=seed)
    else:
        raise ConfigError(f"only 2- and 3-component p-vectors are supported, got {dims}")
    records = to_records(comb, ids)
    T = np.array([r.T for r in records])
    Z = np.array([r.Z for r in records])

    fit = None
    if method == "bh":
        decision = bh_reject(T, alpha)
        records = annotate(records, reject=decision.mask)
    elif method == "spacings-bh":
        decision = spacings_bh(T, alpha)
        records = annotate(records, reject=decision.mask)
    else:
        penalty = len(records) / 4.0 if null_p is None else float(null_p)
        fit = fit_mixture(Z, J=null_j, P=penalty, seed=seed)
        lfdr = left_tail_fdr(fit, Z)
        decision = leftfdr_reject(lfdr, fdr_cutoff)
        records = annotate(records, fdr=local_fdr(fit, Z), left_fdr=lfdr, reject=decision.mask)

    metadata = {
        "input": source or "",
        "dims": str(dims),
        "ordering": scheme.value,
        "method": method,
        "alpha": repr(float(alpha)),
        "fdr_cutoff": repr(float(fdr_cutoff)),
        "null_J": str(null_j),
        "null_P": "auto" if null_p is None else repr(float(null_p)),
        "seed": str(seed),
        "jitter_duplicates": str(bool(jitter)).lower(),
    }
    return AnalysisReport(metadata, records, decision, fit, jittered=comb.jittered)
