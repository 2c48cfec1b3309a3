"""Penalised Gaussian mixture fit of probit-transformed combined p-values.

The mixture has J normal components.  Component 0 is initialised at the
data median and receives ``P`` pseudo-observations in every M-step, i.e.
the penalised log-likelihood is

    sum_i log sum_j pi_j N(z_i; mu_j, sigma_j^2) + P log pi_0,

so larger ``P`` pulls more mass into the central (null) group.  Non-null
components are constrained to be at least as wide as component 0, the
shape of an effect-size mixture convolved with the null noise; when the
constraint binds, the M-step pools the offending variances with the null's.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .errors import ConfigError, DegenerateFit, TooFewPoints

log = logging.getLogger(__name__)

SCALE_FLOOR = 1e-3
MIN_POINTS = 50
MAX_RESCUES = 3

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)
_INIT_QUANTILES = (0.5, 0.1, 0.9)


@dataclass(frozen=True)
class MixtureFit:
    weights: np.ndarray
    means: np.ndarray
    scales: np.ndarray
    null_index: int
    penalty: float
    loglik: float
    iterations: int
    converged: bool
    history: np.ndarray  # penalised log-likelihood at each E-step
    rescues: int = 0

    @property
    def J(self) -> int:
        return len(self.weights)

    @property
    def null_weight(self) -> float:
        return float(self.weights[self.null_index])

    @property
    def null_mean(self) -> float:
        return float(self.means[self.null_index])

    @property
    def null_scale(self) -> float:
        return float(self.scales[self.null_index])

    @classmethod
    def from_params(cls, weights, means, scales, null_index: int | None = None) -> "MixtureFit":
        """Build a fit from known parameters, e.g. for evaluation."""
        w = np.asarray(weights, dtype=float)
        mu = np.asarray(means, dtype=float)
        if null_index is None:
            null_index = designate_null(w, mu)
        return cls(w, mu, np.asarray(scales, dtype=float), null_index, 0.0,
                   float("nan"), 0, True, np.empty(0))


def designate_null(weights: np.ndarray, means: np.ndarray) -> int:
    """Heaviest component; ties go to the mean closest to zero."""
    return int(np.lexsort((np.abs(means), -weights))[0])


def default_penalty(mu_a: float) -> float:
    """Penalty used for weak (2), moderate (3) and strong (4) signals."""
    if mu_a < 2.5:
        return 400.0
    if mu_a < 3.5:
        return 800.0
    return 1000.0


def _log_joint(z, w, mu, sd):
    u = (z[:, None] - mu) / sd
    return np.log(w) - 0.5 * u * u - np.log(sd) - _LOG_SQRT_2PI


def _constrained_variances(nk, ss):
    """Maximise the expected complete log-likelihood in the variances
    subject to var_j >= var_0 for every j > 0."""
    var = ss / nk
    group = [0]
    for j in sorted(range(1, len(nk)), key=lambda j: var[j]):
        pooled = ss[group].sum() / nk[group].sum()
        if var[j] >= pooled:
            break
        group.append(j)
    var[group] = ss[group].sum() / nk[group].sum()
    return var


def fit_mixture(z, J: int = 2, P: float = 0.0, seed: int = 0,
                max_iter: int = 1000, tol: float = 1e-8) -> MixtureFit:
    """Fit the penalised mixture by EM.

    Stops when the relative change of the penalised log-likelihood drops
    below ``tol`` or after ``max_iter`` iterations.  A component whose
    weight or scale collapses is re-seeded (at most ``MAX_RESCUES`` times)
    before ``DegenerateFit`` is raised.
    """
    z = np.asarray(z, dtype=float).ravel()
    n = z.size
    if n < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} values to fit a mixture, got {n}")
    if J not in (2, 3):
        raise ConfigError(f"J must be 2 or 3, got {J!r}")
    if not (P >= 0.0):
        raise ConfigError(f"penalty P must be non-negative, got {P!r}")
    if not np.all(np.isfinite(z)):
        raise DegenerateFit("non-finite values in z")

    spread = max(float(np.std(z)), SCALE_FLOOR)
    mu = np.quantile(z, _INIT_QUANTILES[:J])
    sd = np.full(J, spread)
    w = np.full(J, 1.0 / J)
    prior = np.zeros(J)
    prior[0] = P
    rng = np.random.default_rng(seed)

    history = []
    prev = -np.inf
    rescues = 0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        lj = _log_joint(z, w, mu, sd)
        lse = logsumexp(lj, axis=1)
        ll = float(lse.sum() + P * np.log(w[0]))
        history.append(ll)
        if abs(ll - prev) < tol * abs(ll):
            converged = True
            break
        prev = ll

        r = np.exp(lj - lse[:, None])
        nk = r.sum(axis=0)
        collapsed = nk < 1e-8 * n
        if not collapsed.any():
            new_mu = (r * z[:, None]).sum(axis=0) / nk
            ss = (r * (z[:, None] - new_mu) ** 2).sum(axis=0)
            var = _constrained_variances(nk, ss)
            collapsed = var < SCALE_FLOOR**2
        if collapsed.any():
            rescues += 1
            if rescues > MAX_RESCUES:
                raise DegenerateFit(
                    f"component(s) {np.flatnonzero(collapsed).tolist()} collapsed "
                    f"after {MAX_RESCUES} rescue attempts"
                )
            log.debug("rescuing collapsed components %s", np.flatnonzero(collapsed))
            for j in np.flatnonzero(collapsed):
                mu[j] = np.quantile(z, rng.uniform(0.05, 0.95))
                sd[j] = spread
                w[j] = 1.0 / J
            w = w / w.sum()
            prev = -np.inf
            continue
        w = (nk + prior) / (n + P)
        mu = new_mu
        sd = np.sqrt(var)

    return MixtureFit(
        weights=w, means=mu, scales=sd,
        null_index=designate_null(w, mu),
        penalty=float(P), loglik=history[-1], iterations=it,
        converged=converged, history=np.array(history), rescues=rescues,
    )


def _log_components(fit: MixtureFit, z, cdf: bool) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    u = (z[:, None] - fit.means) / fit.scales
    if cdf:
        return np.log(fit.weights) + log_ndtr(u)
    return np.log(fit.weights) - 0.5 * u * u - np.log(fit.scales) - _LOG_SQRT_2PI


def _null_share(fit: MixtureFit, z, cdf: bool):
    with np.errstate(divide="ignore"):
        lc = _log_components(fit, z, cdf)
    total = logsumexp(lc, axis=1)
    share = np.where(np.isfinite(total), np.exp(lc[:, fit.null_index] - total), 1.0)
    share = np.clip(share, 0.0, 1.0)
    return share if np.ndim(z) else float(share[0])


def local_fdr(fit: MixtureFit, z):
    """Posterior probability that ``z`` came from the null component."""
    return _null_share(fit, z, cdf=False)


def left_tail_fdr(fit: MixtureFit, z):
    """Probability of the null component given a value at or below ``z``."""
    return _null_share(fit, z, cdf=True)
