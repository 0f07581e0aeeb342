"""Shared value types: correlation schemes, angle domains, cost families, estimates.

Parameter indices are 0-based throughout.  A correlation scheme partitions
``range(M)`` into groups; an :class:`AngleSample` stores one free value per
group and :func:`expand` materializes the per-parameter vector.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

# Sign conventions, pinned by tests/test_dicke.py::test_phi2_amplitude_convention.
# |0> is the sigma_z = +1 eigenstate, so |0...0> is the Dicke level m = +n/2.
# rotate(state, axis, a) applies exp(-i a J_axis); exp(i a J_y) is rotate(..., -a).
ZERO_STATE_M_SIGN = +1

# log base used in the purity schedule delta = log(xi) / (4 xi - 4)
PURITY_LOG = math.log

# Removable-singularity switch for the ratio forms of the slow-Grover and
# ring-global costs.
SINGULAR_THRESHOLD = 1e-8


class BplError(Exception):
    """Base class for errors raised by this package."""


class InvalidScheme(BplError, ValueError):
    pass


class DomainError(BplError, ValueError):
    pass


class PreconditionError(BplError, ValueError):
    pass


class ParityError(PreconditionError):
    pass


class DimensionMismatch(BplError, ValueError):
    pass


class SizeError(BplError, ValueError):
    pass


class PoleError(BplError, ZeroDivisionError):
    pass


class NoAnalytic(BplError, NotImplementedError):
    pass


class SingularityWarning(UserWarning):
    pass


class CorrelationKind(enum.Enum):
    UNCORRELATED = "uncorrelated"
    PERFECTLY_CORRELATED = "perfectly_correlated"
    LAYER_CORRELATED = "layer_correlated"


@dataclass(frozen=True)
class CorrelationScheme:
    kind: CorrelationKind
    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        flat = sorted(i for g in groups for i in g)
        if not groups or any(len(g) == 0 for g in groups) or flat != list(range(len(flat))):
            raise InvalidScheme(f"groups {groups!r} do not partition range(M)")
        if self.kind is CorrelationKind.PERFECTLY_CORRELATED and len(groups) != 1:
            raise InvalidScheme("perfectly correlated scheme must have a single group")
        if self.kind is CorrelationKind.UNCORRELATED and any(len(g) != 1 for g in groups):
            raise InvalidScheme("uncorrelated scheme must have singleton groups")

    @property
    def size(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @classmethod
    def uncorrelated(cls, m: int) -> "CorrelationScheme":
        return cls(CorrelationKind.UNCORRELATED, tuple((i,) for i in range(m)))

    @classmethod
    def perfectly_correlated(cls, m: int) -> "CorrelationScheme":
        return cls(CorrelationKind.PERFECTLY_CORRELATED, (tuple(range(m)),))

    @classmethod
    def layer_correlated(cls, groups: Sequence[Sequence[int]]) -> "CorrelationScheme":
        return cls(CorrelationKind.LAYER_CORRELATED, tuple(tuple(g) for g in groups))

    def index_map(self) -> np.ndarray:
        """Array ``g`` with ``g[i]`` the group id of parameter ``i``."""
        out = np.empty(self.size, dtype=np.intp)
        for gid, grp in enumerate(self.groups):
            out[list(grp)] = gid
        return out


@dataclass(frozen=True)
class AngleDomain:
    lower: float
    upper: float
    periodic: bool = True
    include_upper: bool = False

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"empty angle domain [{self.lower}, {self.upper})")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.include_upper:
            return (x > self.lower) & (x <= self.upper)
        return (x >= self.lower) & (x < self.upper)

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        u = rng.random(size)
        if self.include_upper:
            return self.upper - self.width * u
        return self.lower + self.width * u


# (-pi, pi] for the separable circuits, [0, 2pi) for the Grover circuits,
# [-pi, pi) for the ring mixer and the J_x/J_y circuit.
SEPARABLE_DOMAIN = AngleDomain(-math.pi, math.pi, include_upper=True)
GROVER_DOMAIN = AngleDomain(0.0, 2 * math.pi)
MIXER_DOMAIN = AngleDomain(-math.pi, math.pi)


@dataclass(frozen=True)
class AngleSample:
    values: tuple[float, ...]
    scheme: CorrelationScheme
    domain: AngleDomain

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.scheme.n_groups:
            raise InvalidScheme(
                f"{len(values)} free values for {self.scheme.n_groups} correlation groups"
            )
        if not np.all(self.domain.contains(values)):
            raise DomainError(f"angle outside [{self.domain.lower}, {self.domain.upper})")


def expand(sample: AngleSample) -> tuple[float, ...]:
    """Per-parameter values; every member of a group gets the group's value."""
    idx = sample.scheme.index_map()
    return tuple(sample.values[g] for g in idx)


def expand_array(free: np.ndarray, scheme: CorrelationScheme) -> np.ndarray:
    """Batched :func:`expand`: ``(S, n_groups) -> (S, M)``."""
    free = np.asarray(free, dtype=float)
    if free.shape[-1] != scheme.n_groups:
        raise InvalidScheme("free-value width does not match the number of groups")
    return free[..., scheme.index_map()]


class FamilyTag(enum.Enum):
    SEPARABLE_PURE = "separable_pure"
    SEPARABLE_MIXED = "separable_mixed"
    SEPARABLE_LOCAL = "separable_local"
    JXJY_ASYMPTOTIC = "jxjy_asymptotic"
    XI_SEPARABLE_M1 = "xi_separable_m1"
    GROVER_SLOW_GENERAL = "grover_slow_general"
    GROVER_SLOW_CORRELATED = "grover_slow_correlated"
    GROVER_EXACT = "grover_exact"
    ROD_LOCAL = "rod_local"
    ROD_GLOBAL = "rod_global"


_GROVER_SLOW = (FamilyTag.GROVER_SLOW_GENERAL, FamilyTag.GROVER_SLOW_CORRELATED)

_DOMAINS = {
    FamilyTag.SEPARABLE_PURE: SEPARABLE_DOMAIN,
    FamilyTag.SEPARABLE_MIXED: SEPARABLE_DOMAIN,
    FamilyTag.SEPARABLE_LOCAL: SEPARABLE_DOMAIN,
    FamilyTag.JXJY_ASYMPTOTIC: MIXER_DOMAIN,
    FamilyTag.XI_SEPARABLE_M1: SEPARABLE_DOMAIN,
    FamilyTag.GROVER_SLOW_GENERAL: GROVER_DOMAIN,
    FamilyTag.GROVER_SLOW_CORRELATED: GROVER_DOMAIN,
    FamilyTag.GROVER_EXACT: GROVER_DOMAIN,
    FamilyTag.ROD_LOCAL: MIXER_DOMAIN,
    FamilyTag.ROD_GLOBAL: MIXER_DOMAIN,
}


@dataclass(frozen=True)
class CostFamily:
    """A cost-function family bound to its size parameters.

    ``extras`` holds named reals, currently ``gamma`` and ``delta``.
    """

    tag: FamilyTag
    n: int
    L: int
    extras: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "extras", dict(sorted((k, float(v)) for k, v in dict(self.extras).items())))
        if self.n < 1:
            raise PreconditionError("n must be >= 1")
        if self.L < 0:
            raise PreconditionError("L must be >= 0")
        delta = self.extras.get("delta")
        if delta is not None and not 0.0 <= delta < 0.5:
            raise DomainError(f"delta={delta} outside [0, 1/2)")
        if self.tag in _GROVER_SLOW:
            check_slow_grover(self.n, self.L)
            gamma = self.extras.get("gamma")
            if gamma is not None and not 0.0 < gamma < math.pi:
                raise DomainError(f"gamma={gamma} outside (0, pi)")
        if self.tag in (FamilyTag.GROVER_EXACT, FamilyTag.ROD_GLOBAL) and self.n % 2:
            raise ParityError(f"{self.tag.value} requires even n, got n={self.n}")

    def __hash__(self):
        return hash((self.tag, self.n, self.L, tuple(self.extras.items())))

    @property
    def gamma(self) -> float:
        return self.extras.get("gamma", 0.0)

    @property
    def delta(self) -> float:
        return self.extras.get("delta", 0.0)

    @property
    def domain(self) -> AngleDomain:
        return _DOMAINS[self.tag]

    @property
    def n_params(self) -> int:
        """Length of the expanded parameter vector."""
        if self.tag is FamilyTag.JXJY_ASYMPTOTIC:
            return 2 * self.L
        return self.L

    def descriptor(self) -> str:
        extras = ",".join(f"{k}={v!r}" for k, v in self.extras.items())
        return f"{self.tag.value}(n={self.n},L={self.L}{',' + extras if extras else ''})"


def check_slow_grover(n: int, L: int) -> None:
    if n % 2:
        raise ParityError(f"slow Grover circuit needs even n, got {n}")
    if L % 4:
        raise ParityError(f"slow Grover circuit needs L = 0 mod 4, got {L}")


class Target(enum.Enum):
    COST = "cost"
    DERIVATIVE = "derivative"
    DERIVATIVE_SQUARED = "derivative_squared"
    ABS_DERIVATIVE = "abs_derivative"


@dataclass(frozen=True)
class EstimateRecord:
    """Monte-Carlo (or quadrature) estimate of one target quantity.

    ``mean``/``stderr`` refer to the sampled target itself.  ``variance`` is
    the variance of the target and ``variance_stderr`` its standard error;
    when ``zero_mean`` is set the variance is the raw second moment.
    """

    mean: float
    second_moment: float
    variance: float
    stderr: float
    samples: int
    seed: int
    family: str
    target: Target
    variance_stderr: float = 0.0
    zero_mean: bool = False
    method: str = "mc"

    def __post_init__(self):
        if self.samples < 2:
            raise PreconditionError("an estimate needs at least 2 samples")
        if self.variance < 0:
            raise PreconditionError("negative variance")


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def central_weight(n: int) -> float:
    """``C(n, n/2) / 2**(2n - 1)`` evaluated in log space."""
    return math.exp(log_binomial(n, n // 2) - (2 * n - 1) * math.log(2))


def check_even(n: int, what: str = "n") -> None:
    if n % 2:
        raise ParityError(f"{what} must be even, got {n}")
