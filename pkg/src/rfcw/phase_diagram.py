"""Global minima of ``G(x) = beta*x**2/2 - f(beta*x)`` and the phase diagram.

The global minimizers of ``G`` coincide with those of the rate function, so
their number and degeneracy type determine the phase:

=========================  ==============================================
unique minimum, type 1     Paramagnetic
two minima, type 1         Ferromagnetic
three or more, type 1      FirstOrder
unique minimum, type 2     SecondOrder
unique minimum, type 3     Tricritical
=========================  ==============================================

A minimum ``m`` has type ``k`` when the first non-vanishing derivative of
``G`` at ``m`` has order ``2k``; that derivative is the strength.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from dataclasses import dataclass
from functools import partial
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .field_models import Constant, Dichotomous, FieldModel, FreeEnergy, Rotation, Uniform
from .parallel import pmap

if TYPE_CHECKING:
    from .rate_function import RateFunction

GRID_POINTS = 2001
TIE_TOL = 1e-9
ZERO_THRESHOLD = 1e-6
CLUSTER_WIDTH = 2e-2
STATIONARY_TOL = 1e-12
SCAN_HEADER = ["beta", "h", "phase", "n_minima", "m_values", "k_values", "lambda_values"]


class GridResolutionError(RuntimeError):
    pass


class ClassificationError(RuntimeError):
    pass


class PhaseLabel(str, enum.Enum):
    PARAMAGNETIC = "Paramagnetic"
    FERROMAGNETIC = "Ferromagnetic"
    FIRST_ORDER = "FirstOrder"
    SECOND_ORDER = "SecondOrder"
    TRICRITICAL = "Tricritical"


@dataclass(frozen=True)
class MinimumReport:
    location: float
    type: int
    strength: float
    value: float


# ---------------------------------------------------------------------------
# G and its derivatives
# ---------------------------------------------------------------------------

def G_derivative(fe: FreeEnergy, x, order: int = 0):
    """``d^order G / dx^order`` at x, through the chain rule on ``f(beta*x)``."""
    b = fe.beta
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    fx = fe.derivative(b * x, order)
    if order == 0:
        return 0.5 * b * x * x - fx
    if order == 1:
        return b * x - b * fx
    if order == 2:
        return b - b * b * fx
    return -(b**order) * fx


def _grid_for(points: int) -> np.ndarray:
    half = points // 2
    return np.arange(-half, half + 1) / half


def _refine(fe: FreeEnergy, lo: float, hi: float) -> float:
    gp = lambda x: G_derivative(fe, x, 1)
    x = brentq(gp, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # safeguarded Newton polish: only accept steps that stay in the bracket and reduce |G'|
    for _ in range(3):
        g1 = gp(x)
        if abs(g1) <= STATIONARY_TOL * 1e-3:
            break
        g2 = G_derivative(fe, x, 2)
        if g2 == 0:
            break
        step = x - g1 / g2
        if not lo <= step <= hi or abs(gp(step)) >= abs(g1):
            break
        x = step
    return x


def stationary_points(fe: FreeEnergy, grid_points: int = GRID_POINTS) -> list[tuple[float, int]]:
    """Sign-changing roots of ``G'`` in ``(-1, 1)`` as ``(x, kind)``, kind +1 = minimum."""
    xs = _grid_for(grid_points)
    s = np.sign(G_derivative(fe, xs, 1))
    # |f'| < 1, so G'(-1) < 0 < G'(1); at large beta both round to zero
    s[0], s[-1] = -1.0, 1.0
    out: list[tuple[float, int]] = []
    nz = np.flatnonzero(s)
    for i in range(len(xs)):
        if s[i] == 0:
            left = nz[nz < i]
            right = nz[nz > i]
            if len(left) == 0 or len(right) == 0:
                continue
            sl, sr = s[left[-1]], s[right[0]]
            if sl != sr:
                out.append((float(xs[i]), 1 if sl < 0 else -1))
        elif i + 1 < len(xs) and s[i] * s[i + 1] < 0:
            out.append((_refine(fe, xs[i], xs[i + 1]), 1 if s[i] < 0 else -1))
    kinds = [k for _, k in out]
    if not kinds or kinds[0] != 1 or kinds[-1] != 1 or any(a == b for a, b in zip(kinds, kinds[1:])):
        raise GridResolutionError(
            f"inconsistent stationary-point pattern {kinds}; retry with a finer grid")
    return out


def _tie(a: float, b: float, ref: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(ref))


def _merge_clusters(fe: FreeEnergy, points, tol: float) -> list[tuple[float, float]]:
    """Collapse runs of nearby stationary points with numerically equal G.

    Near a degenerate minimum roundoff in G' creates spurious sign changes;
    they sit within CLUSTER_WIDTH of each other with G equal to roundoff.
    Returns local minima as ``(x, G(x))``.
    """
    values = [float(G_derivative(fe, x, 0)) for x, _ in points]
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(points)):
        j = clusters[-1][-1]
        if (points[i][0] - points[j][0] <= CLUSTER_WIDTH
                and _tie(values[i], values[j], values[j], tol)):
            clusters[-1].append(i)
        else:
            clusters.append([i])
    minima = []
    for cl in clusters:
        mins = [i for i in cl if points[i][1] == 1]
        if not mins:
            continue
        if len(cl) == 1:
            minima.append((points[cl[0]][0], values[cl[0]]))
            continue
        centre = 0.5 * (points[cl[0]][0] + points[cl[-1]][0])
        best = min(mins, key=lambda i: abs(points[i][0] - centre))
        minima.append((points[best][0], values[best]))
    return minima


def local_minima(fe: FreeEnergy, grid_points: int = GRID_POINTS, tie_tol: float = TIE_TOL):
    return _merge_clusters(fe, stationary_points(fe, grid_points), tie_tol)


def global_minima(fe: FreeEnergy, grid_points: int = GRID_POINTS,
                  tie_tol: float = TIE_TOL) -> list[tuple[float, float]]:
    """Global minimizers of G as ``(m, G(m))``, ascending in m."""
    mins = local_minima(fe, grid_points, tie_tol)
    g_min = min(v for _, v in mins)
    return [(m, v) for m, v in mins if _tie(v, g_min, g_min, tie_tol)]


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def classify_minimum(rf: "RateFunction", m: float) -> MinimumReport:
    fe = rf.fe
    if abs(G_derivative(fe, m, 1)) > 1e-9:
        raise ValueError(f"x={m!r} is not a stationary point of G")
    for k in (1, 2, 3):
        d = float(G_derivative(fe, m, 2 * k))
        threshold = ZERO_THRESHOLD * max(1.0, fe.beta ** (2 * k))
        if abs(d) <= threshold:
            continue
        if d < 0:
            raise ClassificationError(f"x={m!r} is not a minimum (G^({2 * k}) = {d!r})")
        return MinimumReport(location=float(m), type=k, strength=d,
                             value=float(G_derivative(fe, m, 0)))
    raise ClassificationError(f"minimum at x={m!r} is degenerate beyond type 3")


def find_global_minima(rf: "RateFunction", tol: float = TIE_TOL,
                       grid_points: int = GRID_POINTS) -> list[MinimumReport]:
    minima = rf.global_minima if tol == TIE_TOL and grid_points == GRID_POINTS \
        else global_minima(rf.fe, grid_points, tol)
    return [classify_minimum(rf, m) for m, _ in minima]


def label_from_minima(reports: Sequence[MinimumReport]) -> PhaseLabel:
    types = [r.type for r in reports]
    if len(types) == 1:
        return {1: PhaseLabel.PARAMAGNETIC, 2: PhaseLabel.SECOND_ORDER,
                3: PhaseLabel.TRICRITICAL}[types[0]]
    if any(t != 1 for t in types):
        raise ClassificationError(f"several global minima of types {types}")
    return PhaseLabel.FERROMAGNETIC if len(types) == 2 else PhaseLabel.FIRST_ORDER


def classify_phase(rf: "RateFunction") -> PhaseLabel:
    return label_from_minima(find_global_minima(rf))


# ---------------------------------------------------------------------------
# Critical line and tricritical point
# ---------------------------------------------------------------------------

FAMILIES = {"constant": Constant, "dichotomous": Dichotomous, "uniform": Uniform,
            "rotation": Rotation}


def family_model(family: str | FieldModel, h: float) -> FieldModel:
    """Member of a one-parameter family of field laws with field strength ``h``."""
    if isinstance(family, FieldModel):
        return dataclasses.replace(family, h=h)
    try:
        return FAMILIES[family](h=h)
    except KeyError:
        raise ValueError(f"unknown model family {family!r}") from None


def is_ordered(model: FieldModel, beta: float, grid_points: int = GRID_POINTS) -> bool:
    """True when the global argmin set of G differs from ``{0}``."""
    fe = FreeEnergy(model, beta)
    if G_derivative(fe, 0.0, 2) < 0:
        return True
    g0 = float(G_derivative(fe, 0.0, 0))
    return any(abs(m) > 1e-6 and v < g0 for m, v in local_minima(fe, grid_points))


def critical_beta(model: str | FieldModel, h_param: float,
                  beta_bracket: tuple[float, float]) -> float:
    """Smallest beta at which G acquires a non-zero global minimizer.

    Bisection runs to floating-point resolution so that on a first-order line
    the competing minima tie far below the tie tolerance.
    """
    m = family_model(model, h_param)
    if not m.symmetric:
        raise ValueError("critical_beta requires a symmetric field law")
    lo, hi = map(float, beta_bracket)
    if not 0 < lo < hi:
        raise ValueError(f"invalid beta bracket {beta_bracket}")
    if is_ordered(m, lo) or not is_ordered(m, hi):
        raise ValueError(f"beta bracket {beta_bracket} does not straddle the transition "
                         f"at h={h_param!r}")
    while hi - lo > 4 * np.finfo(float).eps * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if is_ordered(m, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _origin_conditions(family, beta: float, h: float) -> np.ndarray:
    fe = FreeEnergy(family_model(family, h), beta)
    return np.array([1.0 - beta * fe.derivative(0.0, 2), fe.derivative(0.0, 4)])


def tricritical_point(family: str | FieldModel = "dichotomous",
                      guess: tuple[float, float] = (1.5, 0.44),
                      tol: float = 1e-14, max_iter: int = 50) -> tuple[float, float]:
    """Solve ``G''(0) = G''''(0) = 0`` in ``(beta, h)`` by 2-D Newton.

    The Jacobian is a central difference of the analytic derivatives.
    """
    p = np.array(guess, dtype=float)
    step = 1e-6
    for _ in range(max_iter):
        F = _origin_conditions(family, *p)
        if np.max(np.abs(F)) <= tol:
            return float(p[0]), float(p[1])
        J = np.empty((2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = step
            J[:, j] = (_origin_conditions(family, *(p + e))
                       - _origin_conditions(family, *(p - e))) / (2 * step)
        delta = np.linalg.solve(J, -F)
        p = p + delta
        if np.max(np.abs(delta)) <= 1e-15 * max(1.0, np.max(np.abs(p))):
            break
    F = _origin_conditions(family, *p)
    if np.max(np.abs(F)) > 1e3 * tol:
        raise RuntimeError(f"tricritical Newton solve did not converge: residual {F}")
    return float(p[0]), float(p[1])


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanCell:
    beta: float
    h: float
    phase: PhaseLabel
    minima: tuple[MinimumReport, ...]
    critical: bool = False


def classify_point(family, beta: float, h: float, critical: bool = False) -> ScanCell:
    from .rate_function import RateFunction

    rf = RateFunction(FreeEnergy(family_model(family, h), beta))
    reports = tuple(find_global_minima(rf))
    return ScanCell(beta, h, label_from_minima(reports), reports, critical)


def _critical_cell(family, beta_range, h: float) -> ScanCell | None:
    try:
        bc = critical_beta(family, h, beta_range)
    except ValueError:
        return None
    return classify_point(family, bc, h, critical=True)


def phase_scan(family: str | FieldModel, beta_values: Iterable[float], h_values: Iterable[float],
               critical_line: bool = True, workers: int | None = None) -> list[ScanCell]:
    """Label every ``(beta, h)`` lattice point; optionally add one cell per h exactly at
    ``beta_c(h)`` when the beta range straddles it. Sorted by ``(h, beta)``."""
    betas = [float(b) for b in beta_values]
    hs = [float(h) for h in h_values]
    if not betas or not hs:
        raise ValueError("empty beta or h range")
    cells = pmap(partial(classify_point, family), [(b, h) for h in hs for b in betas], workers)
    if critical_line and len(betas) > 1:
        rng = (min(betas), max(betas))
        extra = pmap(partial(_critical_cell, family, rng), [(h,) for h in hs], workers)
        cells.extend(c for c in extra if c is not None)
    cells.sort(key=lambda c: (c.h, c.beta))
    return cells


def _fmt(v: float) -> str:
    return format(v, ".17g")


def scan_to_csv(cells: Sequence[ScanCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for c in cells:
        w.writerow([_fmt(c.beta), _fmt(c.h), c.phase.value, len(c.minima),
                    ";".join(_fmt(r.location) for r in c.minima),
                    ";".join(str(r.type) for r in c.minima),
                    ";".join(_fmt(r.strength) for r in c.minima)])
    return buf.getvalue()


def scan_to_json(cells: Sequence[ScanCell]) -> str:
    return json.dumps([
        {"beta": c.beta, "h": c.h, "phase": c.phase.value, "critical": c.critical,
         "minima": [dataclasses.asdict(r) for r in c.minima]}
        for c in cells
    ], indent=1)


def h_tricritical_dichotomous() -> float:
    """``(2/3) arcosh sqrt(3/2)`` for the symmetric two-valued field law."""
    return 2.0 / 3.0 * math.acosh(math.sqrt(1.5))
