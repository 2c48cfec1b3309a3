"""Seeded Monte Carlo studies of FDR and power (1 - NDR).

Replicate ``r`` of a study draws from ``SeedSequence([seed, r])`` only, so
serial and parallel runs agree bit for bit, and every (mu_A, rho) cell of
a sweep shares the same underlying normal draws.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr

from .empnull import default_penalty, fit_mixture, left_tail_fdr
from .errors import ConfigError, IndexMismatch
from .geometry import voronoi_tessellate
from .highdim import pairwise_average_areas
from .mtp import DecisionSet, bh_reject, leftfdr_reject, spacings_bh
from .ordering import OrderingScheme
from .pipeline import PROBIT_CLAMP, combine_areas

log = logging.getLogger(__name__)

METHODS = ("bh", "spacings-bh", "empirical-null", "max-bh")
CONVENTIONS = ("twosided", "paper-literal")
THREADS_ENV = "VORONOI_FDR_THREADS"
MAX_LABEL = "max"


@dataclass(frozen=True)
class StudyConfig:
    m: int = 2000
    frac_alt: float = 0.1
    mu_a: float = 3.0
    rho: float = 0.0
    reps: int = 100
    schemes: tuple[OrderingScheme, ...] = tuple(OrderingScheme)
    methods: tuple[str, ...] = ("bh", "max-bh")
    alpha: float = 0.05
    fdr_cutoff: float = 0.05
    null_j: int = 2
    null_p: float | None = None  # None: chosen from mu_a
    seed: int = 0
    dims: int = 2
    mixed_null_frac: float = 0.0
    pvalue_convention: str = "twosided"

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(OrderingScheme.parse(s) for s in self.schemes))
        object.__setattr__(self, "methods", tuple(str(x).lower() for x in self.methods))
        for name in ("frac_alt", "mu_a", "rho", "alpha", "fdr_cutoff", "mixed_null_frac"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.m < 2:
            raise ConfigError("m must be at least 2")
        if not 0.0 <= self.frac_alt <= 1.0:
            raise ConfigError("frac_alt must lie in [0, 1]")
        if not 0.0 <= self.mixed_null_frac <= 1.0 - self.frac_alt:
            raise ConfigError("mixed_null_frac must lie in [0, 1 - frac_alt]")
        if not abs(self.rho) < 1.0:
            raise ConfigError("|rho| must be below 1")
        if self.dims not in (2, 3):
            raise ConfigError("dims must be 2 or 3")
        if self.dims == 3 and self.rho < 0:
            raise ConfigError("3-d studies support only rho >= 0 (equicorrelation)")
        if self.dims == 3 and OrderingScheme.DELICHTENBERG in self.schemes:
            raise ConfigError("de Lichtenberg ordering has no 3-d form")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        bad = [x for x in self.methods if x not in METHODS]
        if bad:
            raise ConfigError(f"unknown method(s) {bad}; choose from {METHODS}")
        if self.pvalue_convention not in CONVENTIONS:
            raise ConfigError(f"pvalue_convention must be one of {CONVENTIONS}")
        if not 0.0 < self.alpha < 1.0 or not 0.0 < self.fdr_cutoff < 1.0:
            raise ConfigError("alpha and fdr_cutoff must lie in (0, 1)")
        if self.null_j not in (2, 3):
            raise ConfigError("null_j must be 2 or 3")

    @property
    def n_alt(self) -> int:
        return int(round(self.frac_alt * self.m))

    @property
    def n_mixed(self) -> int:
        return int(round(self.mixed_null_frac * self.m))

    @property
    def penalty(self) -> float:
        return default_penalty(self.mu_a) if self.null_p is None else float(self.null_p)


@dataclass(frozen=True)
class OutcomeCounts:
    """Cells of the m-hypotheses outcome table."""

    U: int  # true null, retained
    V: int  # true null, rejected
    T: int  # true alternative, retained
    S: int  # true alternative, rejected
    R: int
    m: int
    m0: int

    @property
    def fdp(self) -> float:
        return self.V / max(self.R, 1)

    @property
    def tpp(self) -> float:
        """Realised 1 - NDR."""
        return self.S / max(self.S + self.T, 1)


@dataclass(frozen=True)
class StudyRow:
    scheme: str
    method: str
    rho: float
    mu_a: float
    fdr: float
    fdr_se: float
    power: float
    power_se: float
    reps: int


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    rows: tuple[StudyRow, ...]
    counts: dict = field(repr=False)  # (scheme, method) -> list[OutcomeCounts], rep order

    def row(self, scheme, method: str) -> StudyRow:
        label = scheme if scheme == MAX_LABEL else OrderingScheme.parse(scheme).value
        for r in self.rows:
            if r.scheme == label and r.method == method:
                return r
        raise KeyError((label, method))


def replicate_rng(seed: int, rep_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, rep_index]))


def gen_statistics(cfg: StudyConfig, rep_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw one replicate's test statistics.

    Returns an (m, dims) array and the boolean truth vector, True where
    every component is non-null.  Alternatives occupy the first rows,
    followed by mixed vectors with exactly one null component.
    """
    rng = replicate_rng(cfg.seed, rep_index)
    e = rng.standard_normal((cfg.m, cfg.dims))
    if cfg.dims == 2:
        t = np.empty_like(e)
        t[:, 0] = e[:, 0]
        t[:, 1] = cfg.rho * e[:, 0] + np.sqrt(1.0 - cfg.rho**2) * e[:, 1]
    else:
        common = rng.standard_normal(cfg.m)
        t = np.sqrt(cfg.rho) * common[:, None] + np.sqrt(1.0 - cfg.rho) * e
    truth = np.zeros(cfg.m, dtype=bool)
    truth[: cfg.n_alt] = True
    t[: cfg.n_alt] += cfg.mu_a
    for k in range(cfg.n_mixed):
        row = cfg.n_alt + k
        t[row] += cfg.mu_a
        t[row, k % cfg.dims] -= cfg.mu_a
    return t, truth


def to_pvectors(stats, convention: str = "twosided") -> np.ndarray:
    """Componentwise p-values of normal statistics, clamped to [1e-12, 1].

    ``twosided`` is 2 (1 - Phi(|t|)); ``paper-literal`` is 1 - Phi(|t|),
    which is uniform on (0, 1/2) under the null.
    """
    tail = ndtr(-np.abs(np.asarray(stats, dtype=float)))
    if convention == "twosided":
        p = 2.0 * tail
    elif convention == "paper-literal":
        p = tail
    else:
        raise ConfigError(f"unknown p-value convention {convention!r}")
    return np.clip(p, PROBIT_CLAMP, 1.0)


def evaluate(decisions, truth) -> OutcomeCounts:
    """Tally rejections against the truth vector."""
    truth = np.asarray(truth, dtype=bool)
    mask = decisions.mask if isinstance(decisions, DecisionSet) else np.asarray(decisions, dtype=bool)
    if mask.shape != truth.shape:
        raise IndexMismatch(f"{mask.shape[0]} decisions for {truth.shape[0]} hypotheses")
    V = int(np.sum(mask & ~truth))
    S = int(np.sum(mask & truth))
    m0 = int(np.sum(~truth))
    R = int(mask.sum())
    return OutcomeCounts(U=m0 - V, V=V, T=int(truth.sum()) - S, S=S, R=R, m=truth.size, m0=m0)


def _decide(method: str, T: np.ndarray, Z: np.ndarray, cfg: StudyConfig, rep: int) -> DecisionSet:
    if method == "bh":
        return bh_reject(T, cfg.alpha)
    if method == "spacings-bh":
        return spacings_bh(T, cfg.alpha)
    fit = fit_mixture(Z, J=cfg.null_j, P=cfg.penalty, seed=rep)
    return leftfdr_reject(left_tail_fdr(fit, Z), cfg.fdr_cutoff)


def run_replicate(cfg: StudyConfig, rep: int) -> dict:
    stats, truth = gen_statistics(cfg, rep)
    p = to_pvectors(stats, cfg.pvalue_convention)
    out = {}
    voronoi_methods = [x for x in cfg.methods if x != "max-bh"]
    if voronoi_methods:
        if cfg.dims == 2:
            areas = voronoi_tessellate(p, jitter=True, seed=rep).areas
        else:
            areas = pairwise_average_areas(p, jitter=True, seed=rep).mean
        for scheme in cfg.schemes:
            comb = combine_areas(p, areas, scheme)
            for method in voronoi_methods:
                out[(scheme.value, method)] = evaluate(_decide(method, comb.T, comb.Z, cfg, rep), truth)
    if "max-bh" in cfg.methods:
        out[(MAX_LABEL, "max-bh")] = evaluate(bh_reject(p.max(axis=1), cfg.alpha), truth)
    return out


def _replicate_batch(cfg: StudyConfig, reps: Sequence[int]) -> list[dict]:
    return [run_replicate(cfg, r) for r in reps]


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se


def run_study(cfg: StudyConfig, workers: int | None = None) -> StudyResult:
    """Run ``cfg.reps`` replicates and aggregate realised FDR and 1 - NDR."""
    n_workers = min(worker_count(workers), cfg.reps)
    reps = list(range(cfg.reps))
    if n_workers == 1:
        results = _replicate_batch(cfg, reps)
    else:
        chunks = [reps[i::n_workers] for i in range(n_workers)]
        by_rep = {}
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for chunk, res in zip(chunks, pool.map(_replicate_batch, [cfg] * n_workers, chunks)):
                by_rep.update(zip(chunk, res))
        results = [by_rep[r] for r in reps]

    counts: dict = {}
    for res in results:
        for key, c in res.items():
            counts.setdefault(key, []).append(c)
    rows = []
    for (scheme, method), cs in counts.items():
        fdr, fdr_se = _mean_se(np.array([c.fdp for c in cs]))
        power, power_se = _mean_se(np.array([c.tpp for c in cs]))
        rows.append(StudyRow(scheme, method, cfg.rho, cfg.mu_a, fdr, fdr_se, power, power_se, cfg.reps))
    return StudyResult(cfg, tuple(rows), counts)


def run_sweep(cfg: StudyConfig, mu_values: Iterable[float], rho_values: Iterable[float],
              workers: int | None = None) -> list[StudyResult]:
    results = []
    for mu in mu_values:
        for rho in rho_values:
            cell = replace(cfg, mu_a=float(mu), rho=float(rho))
            log.info("study mu_a=%s rho=%s reps=%d", mu, rho, cell.reps)
            results.append(run_study(cell, workers))
    return results


_ALIASES = {
    "fracAlt": "frac_alt",
    "muA": "mu_a",
    "mixedNullFrac": "mixed_null_frac",
    "null-J": "null_j",
    "null-P": "null_p",
    "cutoff": "fdr_cutoff",
    "method": "methods",
    "scheme": "schemes",
    "pvalue-convention": "pvalue_convention",
}


def config_from_mapping(data: dict) -> tuple[StudyConfig, list[float], list[float]]:
    """Build a config from a parsed TOML table.

    ``mu_a`` and ``rho`` may be lists, giving a sweep over their product.
    """
    known = {f.name for f in fields(StudyConfig)}
    kwargs = {}
    for key, value in data.items():
        name = _ALIASES.get(key, key.replace("-", "_"))
        if name not in known:
            raise ConfigError(f"unknown study setting {key!r}")
        kwargs[name] = value
    mu_values = kwargs.pop("mu_a", StudyConfig.mu_a)
    rho_values = kwargs.pop("rho", StudyConfig.rho)
    mu_values = list(mu_values) if isinstance(mu_values, (list, tuple)) else [mu_values]
    rho_values = list(rho_values) if isinstance(rho_values, (list, tuple)) else [rho_values]
    for key in ("schemes", "methods"):
        if isinstance(kwargs.get(key), str):
            kwargs[key] = (kwargs[key],)
    if kwargs.get("null_p") in ("auto", None):
        kwargs.pop("null_p", None)
    try:
        cfg = StudyConfig(mu_a=float(mu_values[0]), rho=float(rho_values[0]), **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    for v in rho_values:
        replace(cfg, rho=float(v))  # validates every cell up front
    return cfg, [float(v) for v in mu_values], [float(v) for v in rho_values]


def load_study_config(path) -> tuple[StudyConfig, list[float], list[float]]:
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data)
