"""Reproducible Monte-Carlo and quadrature estimates of cost and gradient moments.

Samples are drawn in fixed blocks of :data:`BLOCK` from Philox streams keyed
by ``(seed, stream_id, block)``.  Blocks may be evaluated by any number of
worker threads; results are concatenated in block order and reduced once, so
every estimate is bitwise independent of the worker count.
"""
from __future__ import annotations

import enum
import hashlib
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, dicke
from .core import (
    AngleSample,
    CorrelationKind,
    CorrelationScheme,
    CostFamily,
    DomainError,
    EstimateRecord,
    FamilyTag,
    NoAnalytic,
    PreconditionError,
    SingularityWarning,
    Target,
    check_even,
    check_slow_grover,
    expand,
    expand_array,
)

BLOCK = 4096
DEFAULT_STEP = 1e-5
QUADRATURE_NODES = 4096

_ZERO_MEAN = {
    FamilyTag.SEPARABLE_PURE,
    FamilyTag.SEPARABLE_MIXED,
    FamilyTag.GROVER_SLOW_GENERAL,
    FamilyTag.GROVER_SLOW_CORRELATED,
}
_CORRELATED_ONLY = {FamilyTag.GROVER_SLOW_CORRELATED, FamilyTag.ROD_GLOBAL}


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("BPL_WORKERS", "1")))
    except ValueError:
        return 1


def stream_id_for(*parts) -> int:
    """Stable 64-bit id from a tuple of printable parts."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int

    def __post_init__(self):
        for v in (self.seed, self.stream_id):
            if not 0 <= v < 2**64:
                raise DomainError("seed and stream_id must be unsigned 64-bit integers")

    def generator(self, counter: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence([self.seed, self.stream_id, counter])
        return np.random.Generator(np.random.Philox(ss))


def _map_blocks(fn: Callable[[int, int], np.ndarray], samples: int, workers: int | None) -> np.ndarray:
    """Evaluate ``fn(block_index, block_size)`` over all blocks, in block order."""
    sizes = [min(BLOCK, samples - start) for start in range(0, samples, BLOCK)]
    workers = workers or default_workers()
    if workers <= 1 or len(sizes) <= 1:
        parts = [fn(i, s) for i, s in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, range(len(sizes)), sizes))
    return np.concatenate(parts)


# -- angles and gradients -----------------------------------------------------------

class GradMethod(enum.Enum):
    ANALYTIC = "analytic"
    CENTRAL_FD = "central_fd"


@dataclass(frozen=True)
class GradientSpec:
    method: GradMethod = GradMethod.ANALYTIC
    step: float = DEFAULT_STEP
    coordinate: int = 0

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("finite-difference step must be positive")


def _check_scheme(family: CostFamily, scheme: CorrelationScheme) -> None:
    if scheme.size != family.n_params:
        raise PreconditionError(
            f"{family.tag.value} with L={family.L} has {family.n_params} parameters, scheme covers {scheme.size}"
        )
    if family.tag in _CORRELATED_ONLY and scheme.n_groups != 1:
        raise PreconditionError(f"{family.tag.value} is defined on perfectly correlated angles only")


def draw_angles(family: CostFamily, scheme: CorrelationScheme, gen: np.random.Generator, size: int) -> np.ndarray:
    """``(size, M)`` expanded angle vectors, one uniform draw per group."""
    free = family.domain.draw(gen, (size, scheme.n_groups))
    return expand_array(free, scheme)


def sample_angles(family: CostFamily, scheme: CorrelationScheme, rng: RngStream, index: int = 0) -> AngleSample:
    _check_scheme(family, scheme)
    free = family.domain.draw(rng.generator(index), scheme.n_groups)
    return AngleSample(tuple(free), scheme, family.domain)


def cost_batch(family: CostFamily, values: np.ndarray) -> np.ndarray:
    """Cost for each row of expanded parameters ``values`` (shape ``(S, M)``)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    tag, n, L = family.tag, family.n, family.L
    if tag is FamilyTag.SEPARABLE_PURE:
        return analytic.cost_separable_pure(values.sum(-1), n)
    if tag is FamilyTag.SEPARABLE_MIXED:
        return analytic.cost_separable_mixed(values.sum(-1), n, family.delta)
    if tag is FamilyTag.SEPARABLE_LOCAL:
        return analytic.cost_separable_local(values.sum(-1))
    if tag is FamilyTag.JXJY_ASYMPTOTIC:
        return analytic.cost_jxjy_asymptotic(values[:, :L].sum(-1), values[:, L:].sum(-1), n).value
    if tag is FamilyTag.GROVER_SLOW_GENERAL:
        return analytic.grover_slow_cost_general(values, family.gamma, n).value
    if tag is FamilyTag.GROVER_SLOW_CORRELATED:
        return analytic.grover_slow_cost_correlated(_single(values), family.gamma, n, L).value
    if tag is FamilyTag.GROVER_EXACT:
        return dicke.grover_cost_layers(values, family.extras.get("gamma", math.pi), n)
    if tag is FamilyTag.ROD_LOCAL:
        return analytic.rod_local_cost_linear(values, family.gamma, n).value
    if tag is FamilyTag.ROD_GLOBAL:
        return analytic.rod_global_cost_linear(_single(values), family.gamma, n, L).value
    raise PreconditionError(f"{tag.value} has no angle-parameterized cost")


def _single(values: np.ndarray) -> np.ndarray:
    if values.shape[1] > 1 and not np.all(values == values[:, :1]):
        raise PreconditionError("family requires perfectly correlated angles")
    return values[:, 0]


def _analytic_grad(family: CostFamily, values: np.ndarray, members: tuple[int, ...]) -> np.ndarray:
    tag, n, L = family.tag, family.n, family.L
    k = len(members)
    if tag is FamilyTag.SEPARABLE_PURE:
        return k * analytic.grad_separable_pure(values.sum(-1), n)
    if tag is FamilyTag.SEPARABLE_MIXED:
        return k * analytic.grad_separable_mixed(values.sum(-1), n, family.delta)
    if tag is FamilyTag.SEPARABLE_LOCAL:
        return k * analytic.grad_separable_local(values.sum(-1))
    if tag is FamilyTag.GROVER_SLOW_CORRELATED and k == L:
        return analytic.grad_grover_slow_correlated(_single(values), family.gamma, n, L)
    if tag in (FamilyTag.GROVER_SLOW_GENERAL, FamilyTag.GROVER_SLOW_CORRELATED):
        g = analytic.grad_grover_slow_general(values, family.gamma, n)
        return g[:, list(members)].sum(-1)
    if tag is FamilyTag.ROD_LOCAL:
        return analytic.grad_rod_local(values, family.gamma, n)[:, list(members)].sum(-1)
    if tag is FamilyTag.ROD_GLOBAL:
        return analytic.grad_rod_global(_single(values), family.gamma, n, L)
    raise NoAnalytic(f"no closed-form derivative for {tag.value}; use GradMethod.CENTRAL_FD")


def gradient_batch(family: CostFamily, values: np.ndarray, members, spec: GradientSpec) -> np.ndarray:
    """Derivative along the direction that moves every index in ``members`` together."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    members = tuple(members)
    if spec.method is GradMethod.ANALYTIC:
        return _analytic_grad(family, values, members)
    shift = np.zeros(values.shape[1])
    shift[list(members)] = spec.step
    return (cost_batch(family, values + shift) - cost_batch(family, values - shift)) / (2 * spec.step)


def _singular_distance(family: CostFamily, theta: float) -> float | None:
    if family.tag is FamilyTag.GROVER_SLOW_CORRELATED:
        period = 4 * math.pi / family.n
        x = (theta - 2 * math.pi / family.n) % period
    elif family.tag is FamilyTag.ROD_GLOBAL:
        period = math.pi
        x = theta % period
    else:
        return None
    return min(x, period - x)


def gradient(family: CostFamily, params: AngleSample, spec: GradientSpec = GradientSpec()) -> float:
    """Derivative of the family's cost with respect to correlation group ``spec.coordinate``."""
    scheme = params.scheme
    _check_scheme(family, scheme)
    if not 0 <= spec.coordinate < scheme.n_groups:
        raise PreconditionError(f"coordinate {spec.coordinate} outside 0..{scheme.n_groups - 1}")
    members = scheme.groups[spec.coordinate]
    values = np.array(expand(params))[None, :]
    dist = _singular_distance(family, float(values[0, 0]))
    if dist is not None and dist < 10 * spec.step:
        warnings.warn(
            f"{family.tag.value}: angle within {dist:.2e} of a removable singularity", SingularityWarning, stacklevel=2
        )
    return float(gradient_batch(family, values, members, spec)[0])


# -- Monte-Carlo moments -----------------------------------------------------------

def _apply_target(target: Target, x: np.ndarray) -> np.ndarray:
    if target is Target.DERIVATIVE_SQUARED:
        return x * x
    if target is Target.ABS_DERIVATIVE:
        return np.abs(x)
    return x


def summarize(x: np.ndarray, *, seed: int, family: str, target: Target, zero_mean: bool = False,
              method: str = "mc") -> EstimateRecord:
    """Reduce per-sample values of ``target`` to an :class:`EstimateRecord`."""
    x = np.asarray(x, dtype=float)
    N = x.size
    mean = float(np.mean(x))
    sq = x * x
    second = float(np.mean(sq))
    stderr = float(np.std(x, ddof=1) / math.sqrt(N))
    if zero_mean:
        variance = second
        var_se = float(np.std(sq, ddof=1) / math.sqrt(N))
    else:
        dev = (x - mean) ** 2
        variance = float(np.var(x, ddof=1))
        var_se = float(np.std(dev, ddof=1) / math.sqrt(N))
    return EstimateRecord(
        mean=mean, second_moment=second, variance=variance, stderr=stderr, samples=N, seed=seed,
        family=family, target=target, variance_stderr=var_se, zero_mean=zero_mean, method=method,
    )


def sample_target(family: CostFamily, scheme: CorrelationScheme, target: Target, samples: int, seed: int,
                  grad: GradientSpec = GradientSpec(), workers: int | None = None) -> np.ndarray:
    """Raw per-sample values of ``target`` in sample order."""
    _check_scheme(family, scheme)
    members = scheme.groups[grad.coordinate]
    rng = RngStream(seed, stream_id_for(family.descriptor(), scheme.groups))

    def block(i: int, size: int) -> np.ndarray:
        values = draw_angles(family, scheme, rng.generator(i), size)
        if target is Target.COST:
            return cost_batch(family, values)
        return _apply_target(target, gradient_batch(family, values, members, grad))

    return _map_blocks(block, samples, workers)


def mc_moments(family: CostFamily, scheme: CorrelationScheme, target: Target, samples: int, seed: int,
               grad: GradientSpec = GradientSpec(), workers: int | None = None) -> EstimateRecord:
    """Monte-Carlo moments of the cost or a derivative over the family's angle measure.

    For the derivative target of the separable and slow-Grover families, whose
    symmetry forces a zero mean, ``variance`` is the raw second moment.
    """
    if samples < 100:
        raise PreconditionError("mc_moments needs at least 100 samples")
    x = sample_target(family, scheme, target, samples, seed, grad, workers)
    zero_mean = target is Target.DERIVATIVE and family.tag in _ZERO_MEAN
    return summarize(x, seed=seed, family=family.descriptor(), target=target, zero_mean=zero_mean,
                     method=f"mc/{grad.method.value}" if target is not Target.COST else "mc")


# -- specific experiments ------------------------------------------------------------

class Integration(enum.Enum):
    QUADRATURE = "quadrature"
    MC = "mc"


@dataclass(frozen=True)
class QuadratureRecord:
    """Quadrature estimate plus the doubling check."""

    record: EstimateRecord
    refined: float
    relative_change: float


def _grover_dcost(alpha: np.ndarray, n: int, L: int, step: float) -> np.ndarray:
    plus = dicke.grover_cost_exact(alpha + step, math.pi, n, L)
    minus = dicke.grover_cost_exact(alpha - step, math.pi, n, L)
    return (plus - minus) / (2 * step)


def grover_exact_second_moment(n: int, L: int, method: Integration = Integration.QUADRATURE,
                               points_or_samples: int | None = None, seed: int = 0, step: float = DEFAULT_STEP,
                               workers: int | None = None) -> EstimateRecord:
    """``E[(dC/dalpha)^2]`` for the Grover cost at gamma = pi, alpha uniform on [0, 2pi).

    The derivative is a central difference; quadrature is the periodic
    trapezoid rule.  Use :func:`grover_exact_second_moment_checked` for the
    node-doubling diagnostic.
    """
    check_even(n)
    fam = CostFamily(FamilyTag.GROVER_EXACT, n, L, {"gamma": math.pi})
    if method is Integration.QUADRATURE:
        N = points_or_samples or QUADRATURE_NODES
        alpha = 2 * math.pi * np.arange(N) / N
        d2 = _grover_dcost(alpha, n, L, step) ** 2
        mean = float(np.mean(d2))
        second = float(np.mean(d2 * d2))
        return EstimateRecord(
            mean=mean, second_moment=second, variance=max(0.0, second - mean * mean), stderr=0.0,
            samples=N, seed=seed, family=fam.descriptor(), target=Target.DERIVATIVE_SQUARED,
            method="quadrature/central_fd",
        )
    N = points_or_samples or 20_000
    if N < 100:
        raise PreconditionError("MC needs at least 100 samples")
    rng = RngStream(seed, stream_id_for(fam.descriptor(), "dC/dalpha"))

    def block(i: int, size: int) -> np.ndarray:
        alpha = fam.domain.draw(rng.generator(i), size)
        return _grover_dcost(alpha, n, L, step) ** 2

    x = _map_blocks(block, N, workers)
    return summarize(x, seed=seed, family=fam.descriptor(), target=Target.DERIVATIVE_SQUARED, method="mc/central_fd")


def grover_exact_second_moment_checked(n: int, L: int, points: int = QUADRATURE_NODES,
                                       step: float = DEFAULT_STEP) -> QuadratureRecord:
    rec = grover_exact_second_moment(n, L, Integration.QUADRATURE, points, step=step)
    fine = grover_exact_second_moment(n, L, Integration.QUADRATURE, 2 * points, step=step)
    denom = abs(fine.mean) or 1.0
    return QuadratureRecord(rec, fine.mean, abs(fine.mean - rec.mean) / denom)


def haar_u2_batch(gen: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random 2x2 unitaries (QR of complex Ginibre, phases fixed)."""
    z = (gen.standard_normal((size, 2, 2)) + 1j * gen.standard_normal((size, 2, 2))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def haar_u2_sample(rng: RngStream | np.random.Generator) -> np.ndarray:
    gen = rng.generator(0) if isinstance(rng, RngStream) else rng
    return haar_u2_batch(gen, 1)[0]


def xi_separable_grad_mc(xi: int, delta: float, samples: int, seed: int,
                         workers: int | None = None) -> EstimateRecord:
    """Haar estimate of ``(xi^2/4) E[(tr W rho W^+ |0><0|)^(2 xi - 2)]`` on U(2).

    ``rho = diag(1 - delta, delta)``.  The factor after ``W_B`` is dropped:
    conjugating the observable by a unitary does not change its spectrum.
    """
    if xi < 1:
        raise PreconditionError("xi must be >= 1")
    if not 0.0 <= delta < 0.5:
        raise DomainError(f"delta={delta} outside [0, 1/2)")
    rng = RngStream(seed, stream_id_for("xi_separable_m1", "haar_u2"))

    def block(i: int, size: int) -> np.ndarray:
        w = haar_u2_batch(rng.generator(i), size)
        t = (1 - delta) * np.abs(w[:, 0, 0]) ** 2 + delta * np.abs(w[:, 0, 1]) ** 2
        return xi**2 / 4 * t ** (2 * (xi - 1))

    x = _map_blocks(block, samples, workers)
    fam = f"xi_separable_m1(xi={xi},delta={delta!r})"
    return summarize(x, seed=seed, family=fam, target=Target.DERIVATIVE_SQUARED, method="mc/haar")


def fig3_left_point(n: int, L: int, samples: int = 20_000, seed: int = 0,
                    workers: int | None = None) -> EstimateRecord:
    """MC of ``E[(df/dtheta)^2]``, where ``C = 1 - gamma^2 f(theta) + O(gamma^4)``.

    This is the gamma^4 coefficient of ``E[(dC/dtheta)^2]`` for the correlated
    slow Grover cost; theta is uniform on [0, 2pi).
    """
    check_slow_grover(n, L)
    rng = RngStream(seed, stream_id_for("grover_slow_correlated", n, L, "gamma4"))

    def block(i: int, size: int) -> np.ndarray:
        theta = rng.generator(i).random(size) * (2 * math.pi)
        return analytic.slow_grover_coefficient_derivative(theta, n, L) ** 2

    x = _map_blocks(block, samples, workers)
    fam = f"grover_slow_correlated(n={n},L={L}) gamma^4 coefficient"
    return summarize(x, seed=seed, family=fam, target=Target.DERIVATIVE_SQUARED, method="mc/analytic")


def scheme_for(family: CostFamily, kind: CorrelationKind = CorrelationKind.PERFECTLY_CORRELATED) -> CorrelationScheme:
    m = family.n_params
    if kind is CorrelationKind.UNCORRELATED:
        return CorrelationScheme.uncorrelated(m)
    return CorrelationScheme.perfectly_correlated(m)
