"""Log-space least-squares scaling fits and the barren-plateau verdict."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import BplError

# Default fitting windows.
MIN_N = 14
MIN_L = 16

# A finite-data reading of "variance decays like b^n with b < 1".
BPL_MAX_BASE = 0.9
BPL_MIN_R2 = 0.9
NOBPL_MIN_R2 = 0.5
POLY_R2_MARGIN = 0.05


class InsufficientData(BplError, ValueError):
    pass


class NonPositive(BplError, ValueError):
    pass


class ModelMismatch(BplError, ValueError):
    pass


class Model(enum.Enum):
    POWER_L = "powerL"  # y = b L^a
    EXP_N = "expN"  # y = d 2^(-r n)
    EXP_GENERIC = "expGeneric"  # y = d b^n


@dataclass(frozen=True)
class ScalingFit:
    model: Model
    exponent: float
    prefactor: float
    r_squared: float
    domain_filter: str
    points: int


class Verdict(enum.Enum):
    BPL = "BPL"
    NO_BPL = "NoBPL"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class BplVerdict:
    verdict: Verdict
    decay_rate: float
    confidence: str


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and R^2 of ``y ~ x``; R^2 = 1 when y is constant."""
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    # constant y up to rounding: the fit is exact
    flat = ss_tot <= 1e-24 * y.size * max(1.0, float(np.max(np.abs(y)))) ** 2
    r2 = 1.0 if flat else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(icpt), min(1.0, r2)


def _prepare(points: Iterable[Sequence[float]], lo: float, what: str) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted((float(a), float(b)) for a, b in points if a >= lo)
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 points with {what} >= {lo}, got {len(pts)}")
    x, y = np.array(pts).T
    if np.any(y <= 0):
        raise NonPositive("log-space fit needs positive y")
    return x, y


def fit_power_L(points, min_L: int = MIN_L) -> ScalingFit:
    """Fit ``y = b L^a`` by OLS on ``(log2 L, log2 y)``."""
    L, y = _prepare(points, min_L, "L")
    a, c, r2 = _ols(np.log2(L), np.log2(y))
    return ScalingFit(Model.POWER_L, a, 2.0**c, r2, f"L >= {min_L}", len(L))


def fit_exp_n(points, min_n: int = MIN_N) -> ScalingFit:
    """Fit ``y = d 2^(-r n)`` by OLS on ``(n, log2 y)``; ``exponent`` is ``r``."""
    n, y = _prepare(points, min_n, "n")
    s, c, r2 = _ols(n, np.log2(y))
    return ScalingFit(Model.EXP_N, -s, 2.0**c, r2, f"n >= {min_n}", len(n))


def fit_exp_generic(points, min_n: int = 0) -> ScalingFit:
    """Fit ``y = d b^n``; ``exponent`` is ``log2 b``."""
    n, y = _prepare(points, min_n, "n")
    s, c, r2 = _ols(n, np.log2(y))
    return ScalingFit(Model.EXP_GENERIC, s, 2.0**c, r2, f"n >= {min_n}", len(n))


def classify_bpl(points) -> BplVerdict:
    """Decide BPL / NoBPL from ``(n, variance)`` pairs.

    BPL when the exponential fit has base below :data:`BPL_MAX_BASE` with
    R^2 of at least :data:`BPL_MIN_R2`; NoBPL when the base is at least 1
    with R^2 >= :data:`NOBPL_MIN_R2`, or when a power law in n beats the
    exponential fit's R^2 by :data:`POLY_R2_MARGIN`.
    """
    pts = sorted((float(a), float(b)) for a, b in points)
    if len(pts) < 4:
        raise InsufficientData("classify_bpl needs at least 4 points")
    n = np.array([p[0] for p in pts])
    if n.min() <= 0 or n.max() < 2 * n.min():
        raise InsufficientData("points must span a factor of 2 in n")
    exp_fit = fit_exp_generic(pts)
    base = 2.0**exp_fit.exponent
    _, _, poly_r2 = _ols(np.log2(n), np.log2([p[1] for p in pts]))
    if base < BPL_MAX_BASE and exp_fit.r_squared >= BPL_MIN_R2:
        return BplVerdict(Verdict.BPL, base, f"b={base:.4g}, R2={exp_fit.r_squared:.4f}")
    if base >= 1.0 and exp_fit.r_squared >= NOBPL_MIN_R2:
        return BplVerdict(Verdict.NO_BPL, base, f"b={base:.4g} >= 1, R2={exp_fit.r_squared:.4f}")
    if poly_r2 > exp_fit.r_squared + POLY_R2_MARGIN:
        return BplVerdict(Verdict.NO_BPL, base, f"power law R2={poly_r2:.4f} beats exponential R2={exp_fit.r_squared:.4f}")
    return BplVerdict(Verdict.INCONCLUSIVE, base, f"b={base:.4g}, R2={exp_fit.r_squared:.4f}, power-law R2={poly_r2:.4f}")


def crossover_exponent(a_fit: ScalingFit, r_fit: ScalingFit) -> float:
    """Depth exponent c at which ``L^a 2^(-r n)`` stays flat along ``L ~ 2^(c n)``."""
    if a_fit.model is not Model.POWER_L or r_fit.model is not Model.EXP_N:
        raise ModelMismatch("crossover needs a power-law-in-L fit and an exponential-in-n fit")
    return r_fit.exponent / a_fit.exponent


def mean_exponent(fits: Sequence[ScalingFit]) -> float:
    return float(np.mean([f.exponent for f in fits])) if fits else math.nan
