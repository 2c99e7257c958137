"""Legendre-Fenchel conjugation of the limiting free energy.

``f`` is smooth and strictly convex with ``f'`` onto a subinterval of
``(-1, 1)``, so for ``|x| < 1`` the supremum in ``sup_y {x*y - f(y)}`` is
attained at the unique root of ``f'(y) = x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq, minimize_scalar

from .field_models import LN2, FreeEnergy

INF = math.inf
Y_CAP = 700.0


class ConjugationError(RuntimeError):
    """Root finding for the conjugate maximizer failed."""

    def __init__(self, x: float, bracket: tuple[float, float], cause: str = ""):
        self.x = x
        self.bracket = bracket
        super().__init__(f"no maximizer for x={x!r} in bracket {bracket}: {cause}")


@dataclass(frozen=True)
class Conjugate:
    fe: FreeEnergy
    root_tol: float = 1e-12
    max_iter: int = 200

    def boundary_value(self, sign: float) -> float:
        """Limit of ``f*`` at ``x = sign``: ``ln 2 - sign*beta*E[h]``."""
        return LN2 - sign * self.fe.beta * self.fe.mean_field

    def bracket(self, x: float) -> tuple[float, float] | None:
        fp = lambda y: self.fe.derivative(y, 1)
        lo, hi = -1.0, 1.0
        while fp(lo) > x:
            if lo <= -Y_CAP:
                return None
            lo = max(2.0 * lo, -Y_CAP)
        while fp(hi) < x:
            if hi >= Y_CAP:
                return None
            hi = min(2.0 * hi, Y_CAP)
        return lo, hi

    def maximizer(self, x: float, br: tuple[float, float] | None = None) -> float:
        """The ``y*`` solving ``f'(y*) = x``, for ``|x| < 1``."""
        br = br or self.bracket(x)
        if br is None:
            raise ConjugationError(x, (-Y_CAP, Y_CAP), "f' does not reach x below the cap")
        lo, hi = br
        try:
            return brentq(lambda y: self.fe.derivative(y, 1) - x, lo, hi,
                          xtol=self.root_tol, maxiter=self.max_iter)
        except (RuntimeError, ValueError) as exc:
            raise ConjugationError(x, br, str(exc)) from None


def conjugate(c: Conjugate, x: float) -> float:
    """``f*(x) = sup_y {x*y - f(y)}``; ``+inf`` outside ``[-1, 1]``."""
    x = float(x)
    if abs(x) > 1.0:
        return INF
    if abs(x) == 1.0:
        return c.boundary_value(x)
    br = c.bracket(x)
    if br is None:
        # x is so close to +-1 that f' saturates before the cap
        return c.boundary_value(math.copysign(1.0, x))
    y = c.maximizer(x, br)
    return x * y - c.fe(y)


def log_mgf(c: Conjugate, x) -> float:
    """``Lambda(x) = f(x) - f(0)``, the scaled cumulant generating function under Q."""
    return c.fe(x) - c.fe(0.0)


def cramer_R(c: Conjugate, x: float) -> float:
    """Rate function of ``S_n/n`` under the product measure Q: ``f*(x) + f(0)``."""
    v = conjugate(c, x)
    return v if v == INF else v + c.fe(0.0)


def biconjugate_check(c: Conjugate, x: float) -> float:
    """``f**(x) = sup_{|u| <= 1} {x*u - f*(u)}`` by bounded scalar maximization.

    Equals ``f(x)`` for the closed convex ``f`` used here.
    """
    x = float(x)
    res = minimize_scalar(lambda u: conjugate(c, u) - x * u, bounds=(-1.0, 1.0),
                          method="bounded", options={"xatol": 1e-12, "maxiter": 500})
    best = -res.fun
    for edge in (-1.0, 1.0):
        best = max(best, x * edge - conjugate(c, edge))
    return best
