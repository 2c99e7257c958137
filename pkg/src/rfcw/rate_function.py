"""Rate function ``I(x) = J(x) - inf J`` with ``J(x) = f*(x) - beta*x**2/2``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .field_models import FreeEnergy
from .legendre import INF, Conjugate, conjugate, cramer_R
from .phase_diagram import G_derivative, global_minima

# roundoff allowance below zero at the minimizers of J
NEG_SLACK = 1e-10


@dataclass(frozen=True)
class TiltFunction:
    beta: float

    def __call__(self, x):
        return tilt_F(self, x)


def tilt_F(t: TiltFunction, x):
    """``beta*x**2/2`` on ``[-1, 1]``, ``beta/2`` outside."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) <= 1.0, 0.5 * t.beta * x * x, 0.5 * t.beta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RateFunction:
    """Rate function of the magnetization per spin under the Gibbs measure.

    ``inf J`` equals ``min G`` by Toland duality, so it is taken from the global
    minimizers of G, computed once at construction.
    """

    fe: FreeEnergy
    conj: Conjugate = field(init=False)
    global_minima: tuple[tuple[float, float], ...] = field(init=False, repr=False)
    inf_J: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "conj", Conjugate(self.fe))
        mins = tuple(global_minima(self.fe))
        object.__setattr__(self, "global_minima", mins)
        object.__setattr__(self, "inf_J", min(v for _, v in mins))

    @classmethod
    def from_model(cls, model, beta: float) -> "RateFunction":
        return cls(FreeEnergy(model, beta))

    @property
    def beta(self) -> float:
        return self.fe.beta

    @property
    def minimizers(self) -> list[float]:
        return [m for m, _ in self.global_minima]

    def J(self, x: float) -> float:
        v = conjugate(self.conj, x)
        return v if v == INF else v - 0.5 * self.beta * x * x

    def __call__(self, x: float) -> float:
        return rate_I(self, x)


def rate_I(rf: RateFunction, x: float) -> float:
    x = float(x)
    if abs(x) > 1.0:
        return INF
    v = rf.J(x) - rf.inf_J
    if -NEG_SLACK < v < 0.0:
        return 0.0
    return v


def G_of(rf: RateFunction, x):
    """``G(x) = beta*x**2/2 - f(beta*x)``."""
    return G_derivative(rf.fe, x, 0)


def rate_via_tilt(rf: RateFunction, x: float) -> float:
    """``R(x) - F(x) - inf_y {R(y) - F(y)}`` with R the rate function under Q.

    The infimum is attained at the global minimizers of G.
    """
    F = TiltFunction(rf.beta)
    r = cramer_R(rf.conj, x)
    if r == INF:
        return INF
    inf_rf = min(cramer_R(rf.conj, m) - F(m) for m in rf.minimizers)
    return r - F(x) - inf_rf


def _normalize_set(intervals) -> list[tuple[float, float]]:
    if len(intervals) == 2 and all(isinstance(v, (int, float)) for v in intervals):
        intervals = [intervals]
    out = []
    for lo, hi in intervals:
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        out.append((float(lo), float(hi)))
    return out


def inf_rate(rf: RateFunction, intervals, grid: int = 201) -> float:
    """``inf I`` over a union of closed intervals; ``inf`` if it misses ``[-1, 1]``."""
    best = INF
    for lo, hi in _normalize_set(intervals):
        lo, hi = max(lo, -1.0), min(hi, 1.0)
        if lo > hi:
            continue
        if any(lo <= m <= hi for m in rf.minimizers):
            return 0.0
        xs = np.linspace(lo, hi, grid)
        vals = np.array([rate_I(rf, x) for x in xs])
        i = int(np.argmin(vals))
        cand = vals[i]
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
        if b > a:
            res = minimize_scalar(lambda x: rate_I(rf, x), bounds=(a, b), method="bounded",
                                  options={"xatol": 1e-12})
            cand = min(cand, float(res.fun))
        best = min(best, cand)
    return best
