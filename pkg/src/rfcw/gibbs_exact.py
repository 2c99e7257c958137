"""Exact finite-n law of the magnetization per spin ``S_n/n``.

Under the product measure Q with ``Q_i(+1) = exp(beta*h_i) / (2 cosh(beta*h_i))``
the law of ``S_n`` is a sequential convolution of two-point laws. The Gibbs
law is that law tilted by ``exp(n * F(m))``, ``F(m) = beta*m**2/2``, then
renormalized. Everything is kept as log-weights.
"""
from __future__ import annotations

import itertools
import logging
import statistics
from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numba
import numpy as np
from scipy.special import logsumexp

from .field_models import LN2, FieldModel, FieldRealization, FreeEnergy, logcosh, sample_fields
from .legendre import INF
from .parallel import pmap
from .rate_function import RateFunction, TiltFunction, inf_rate

log = logging.getLogger(__name__)

ENDPOINT_TOL = 1e-12
BRUTE_FORCE_MAX_N = 14
REPORT_HEADER = ["n", "seed", "set_lo", "set_hi", "empirical_rate", "theory_rate", "deviation"]


@dataclass(frozen=True, eq=False)
class MagnetizationPMF:
    """Law of ``S_n/n`` on ``{-1, -1 + 2/n, ..., 1}`` stored as log-probabilities."""

    n: int
    log_probs: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return (2.0 * np.arange(self.n + 1) - self.n) / self.n

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)


def _fields(realization) -> np.ndarray:
    if isinstance(realization, FieldRealization):
        return realization.values
    return np.atleast_1d(np.asarray(realization, dtype=float))


def _site_log_probs(h: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    bh = beta * h
    norm = logcosh(bh) + LN2
    return bh - norm, -bh - norm


def product_pmf(realization, beta: float) -> MagnetizationPMF:
    """Law of ``S_n/n`` under Q by an O(n^2) log-space convolution over sites."""
    h = _fields(realization)
    lp, lm = _site_log_probs(h, beta)
    n = len(h)
    # logw[k] = log Q(k spins up among the sites processed so far)
    logw = np.zeros(1)
    for i in range(n):
        new = np.empty(i + 2)
        new[0] = logw[0] + lm[i]
        new[-1] = logw[-1] + lp[i]
        new[1:-1] = np.logaddexp(logw[1:] + lm[i], logw[:-1] + lp[i])
        logw = new
    return MagnetizationPMF(n, logw - logsumexp(logw))


def tilt(pmf: MagnetizationPMF, beta: float) -> MagnetizationPMF:
    w = pmf.log_probs + pmf.n * TiltFunction(beta)(pmf.support)
    return MagnetizationPMF(pmf.n, w - logsumexp(w))


def gibbs_pmf(realization, beta: float) -> MagnetizationPMF:
    """Law of ``S_n/n`` under the Gibbs measure with fields ``h``."""
    return tilt(product_pmf(realization, beta), beta)


def brute_force_log_pmf(realization, beta: float, measure: str = "gibbs") -> np.ndarray:
    """Log-law of ``S_n/n`` by summing over all ``2**n`` spin configurations.

    ``measure="gibbs"`` uses the Boltzmann weight
    ``beta/(2n) * S**2 + beta * sum(h_i * sigma_i)``; ``"product"`` uses Q.
    """
    h = _fields(realization)
    n = len(h)
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is capped at n={BRUTE_FORCE_MAX_N}")
    sigma = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    S = sigma.sum(axis=1)
    if measure == "gibbs":
        logw = beta / (2.0 * n) * S * S + beta * (sigma @ h)
    elif measure == "product":
        lp, lm = _site_log_probs(h, beta)
        logw = np.where(sigma > 0, lp, lm).sum(axis=1)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    k = ((S + n) / 2).astype(int)
    out = np.array([logsumexp(logw[k == j]) for j in range(n + 1)])
    return out - logsumexp(out)


def _intervals(sets) -> list[tuple[float, float]]:
    if len(sets) == 2 and all(isinstance(v, (int, float)) for v in sets):
        sets = [sets]
    return [(float(lo), float(hi)) for lo, hi in sets]


def empirical_rate(pmf: MagnetizationPMF, intervals) -> float:
    """``-(1/n) ln P(S_n/n in set)`` for a union of closed intervals."""
    m = pmf.support
    mask = np.zeros(pmf.n + 1, dtype=bool)
    for lo, hi in _intervals(intervals):
        mask |= (m >= lo - ENDPOINT_TOL) & (m <= hi + ENDPOINT_TOL)
    if not mask.any():
        return INF
    return float(-logsumexp(pmf.log_probs[mask]) / pmf.n) + 0.0


# ---------------------------------------------------------------------------
# Convergence study
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    n: int
    seed: int
    set_lo: float
    set_hi: float
    empirical_rate: float
    theory_rate: float

    @property
    def deviation(self) -> float:
        return abs(self.empirical_rate - self.theory_rate)


@dataclass(frozen=True)
class ConvergenceReport:
    rows: list[ReportRow]
    n_list: list[int]

    def median_deviations(self) -> list[float]:
        return [statistics.median(r.deviation for r in self.rows if r.n == n) for n in self.n_list]

    def monotone(self) -> bool | None:
        """Whether the median deviation is non-increasing over the last three n.

        ``None`` when fewer than three sizes were run.
        """
        med = self.median_deviations()
        if len(med) < 3:
            return None
        tail = med[-3:]
        return all(b <= a for a, b in zip(tail, tail[1:]))

    def to_csv(self) -> str:
        lines = [",".join(REPORT_HEADER)]
        for r in self.rows:
            vals = [r.set_lo, r.set_hi, r.empirical_rate, r.theory_rate, r.deviation]
            lines.append(",".join([str(r.n), str(r.seed)] + [_fmt(v) for v in vals]))
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return "inf" if v == INF else format(v, ".17g")


def _report_row(model, beta, interval, theory, n, seed) -> ReportRow:
    pmf = gibbs_pmf(sample_fields(model, n, seed), beta)
    return ReportRow(n, seed, interval[0], interval[1], empirical_rate(pmf, interval), theory)


def ldp_convergence_report(model: FieldModel, beta: float, interval: tuple[float, float],
                           n_list: Sequence[int], seeds: Sequence[int],
                           theory_beta: float | None = None,
                           workers: int | None = None) -> ConvergenceReport:
    """Empirical rates of the exact Gibbs law against ``inf I`` over the interval.

    ``theory_beta`` overrides the temperature on the theory side only.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    interval = (float(interval[0]), float(interval[1]))
    rf = RateFunction(FreeEnergy(model, beta if theory_beta is None else theory_beta))
    theory = inf_rate(rf, interval)
    jobs = [(n, s) for n in n_list for s in seeds]
    rows = pmap(partial(_report_row, model, beta, interval, theory), jobs, workers)
    report = ConvergenceReport(rows, n_list)
    if report.monotone() is None:
        log.warning("fewer than three system sizes; monotonicity check skipped")
    return report


# ---------------------------------------------------------------------------
# Heat-bath sampler
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _heat_bath_sweeps(spins, h, beta, uniforms, out, offset):
    n = spins.shape[0]
    S = 0.0
    for i in range(n):
        S += spins[i]
    for t in range(uniforms.shape[0]):
        for i in range(n):
            rest = S - spins[i]
            p_up = 1.0 / (1.0 + np.exp(-2.0 * beta * (rest / n + h[i])))
            s_new = 1.0 if uniforms[t, i] < p_up else -1.0
            S = rest + s_new
            spins[i] = s_new
        out[offset + t] = S / n


def glauber_sample(realization, beta: float, sweeps: int, seed: int,
                   initial: str | np.ndarray = "random") -> np.ndarray:
    """Magnetization after each systematic heat-bath sweep of the Gibbs measure.

    Each spin is redrawn from its conditional law given the others,
    ``P(+1) = 1 / (1 + exp(-2 beta (S_rest/n + h_i)))``.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    h = np.ascontiguousarray(_fields(realization), dtype=float)
    n = len(h)
    rng = np.random.default_rng(seed)
    if isinstance(initial, str):
        if initial == "random":
            spins = rng.choice((-1.0, 1.0), size=n)
        elif initial == "plus":
            spins = np.ones(n)
        elif initial == "minus":
            spins = -np.ones(n)
        else:
            raise ValueError(f"unknown initial state {initial!r}")
    else:
        spins = np.array(initial, dtype=float)
    out = np.empty(sweeps)
    chunk = max(1, (1 << 20) // n)
    for start in range(0, sweeps, chunk):
        m = min(chunk, sweeps - start)
        _heat_bath_sweeps(spins, h, float(beta), rng.random((m, n)), out, start)
    return out


def magnetization_histogram(samples: np.ndarray, n: int) -> np.ndarray:
    """Empirical law of sampled ``S_n/n`` on the lattice ``X_n``."""
    k = np.rint((np.asarray(samples) * n + n) / 2).astype(int)
    return np.bincount(k, minlength=n + 1) / len(k)
