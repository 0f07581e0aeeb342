"""Closed-form costs, derivatives, variances and bounds.

Functions taking angles accept numpy arrays and broadcast, so the Monte-Carlo
estimator can evaluate whole sample batches at once.  Truncated expansions
return a :class:`ClosedFormValue` carrying the order of the truncation.
"""
from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .core import (
    PURITY_LOG,
    SINGULAR_THRESHOLD,
    DomainError,
    PreconditionError,
    central_weight,
    check_even,
    check_slow_grover,
    log_binomial,
)


class OrderTag(enum.Enum):
    EXACT = "exact"
    ORDER_GAMMA_SQUARED = "O(gamma^2)"
    ORDER_GAMMA_LINEAR = "O(gamma)"
    ASYMPTOTIC_IN_N = "asymptotic_n"
    ASYMPTOTIC_IN_L = "asymptotic_L"


class ClosedFormValue(NamedTuple):
    value: float | np.ndarray
    order_tag: OrderTag


def _check_delta(delta):
    if not 0.0 <= delta < 0.5:
        raise DomainError(f"delta={delta} outside [0, 1/2)")


# -- separable circuits --------------------------------------------------------

def cost_separable_pure(theta_sum, n: int):
    """``1 - cos(theta_sum/2)**(2n)`` for the perfectly correlated Y-rotation circuit."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return 1.0 - np.cos(np.asarray(theta_sum) / 2) ** (2 * n)


def cost_separable_mixed(theta_sum, n: int, delta: float):
    """Same circuit on the input ``diag(1-delta, delta)**n``.

    Implemented as ``1 - (delta + (1-2 delta) cos^2(theta_sum/2))**n``, which
    reduces to :func:`cost_separable_pure` at ``delta = 0``.
    """
    _check_delta(delta)
    c2 = np.cos(np.asarray(theta_sum) / 2) ** 2
    return 1.0 - (delta + (1 - 2 * delta) * c2) ** n


def cost_separable_local(theta_sum):
    return 1.0 - np.cos(np.asarray(theta_sum) / 2) ** 2


def grad_separable_pure(theta_sum, n: int):
    """Derivative of :func:`cost_separable_pure` with respect to any single angle."""
    half = np.asarray(theta_sum) / 2
    return n * np.cos(half) ** (2 * n - 1) * np.sin(half)


def grad_separable_mixed(theta_sum, n: int, delta: float):
    _check_delta(delta)
    half = np.asarray(theta_sum) / 2
    c, s = np.cos(half), np.sin(half)
    p = delta + (1 - 2 * delta) * c * c
    return n * p ** (n - 1) * (1 - 2 * delta) * c * s


def grad_separable_local(theta_sum):
    half = np.asarray(theta_sum) / 2
    return np.cos(half) * np.sin(half)


def variance_separable_pure(n: int) -> float:
    """Exact ``Var(dC)`` for the pure separable cost; independent of the depth."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    log_v = (
        2 * math.log(n)
        + log_binomial(4 * n, 2 * n)
        - 4 * n * math.log(2)
        - math.log(4 * n - 1)
    )
    return math.exp(log_v)


def variance_separable_pure_asymptotic(n: int) -> float:
    return math.sqrt(n) / (4 * math.sqrt(2 * math.pi))


# -- J_x / J_y circuit -----------------------------------------------------------

def cost_jxjy_asymptotic(sum_beta, sum_alpha, n: int) -> ClosedFormValue:
    """Large-n form of the fidelity ``|<0|R(beta, alpha)|0>|^2``; 1 is optimal here."""
    r = np.hypot(sum_beta, sum_alpha)
    return ClosedFormValue(np.cos(r / (2 * math.sqrt(n))) ** (2 * n), OrderTag.ASYMPTOTIC_IN_N)


# -- xi-separable Haar circuits, m = 1 -------------------------------------------

def variance_xi_separable_m1(xi: int, delta: float) -> float:
    """``c**-2 Var`` for xi single-qubit Haar blocks, as published (residue form)."""
    _check_delta(delta)
    if xi < 1:
        raise PreconditionError("xi must be >= 1")
    return xi**2 * (1 - 2 * delta) ** (2 * xi - 2) / (4 * (2 * xi - 1))


def variance_xi_separable_direct(xi: int, delta: float) -> float:
    """``(xi^2/4) E[(delta + (1-2 delta) u)^(2 xi - 2)]`` with ``u ~ U[0, 1]``.

    ``u = |<0|W|0>|^2`` is uniform for Haar ``W`` on U(2).  Agrees with
    :func:`variance_xi_separable_m1` only at ``delta = 0``.
    """
    _check_delta(delta)
    if xi < 1:
        raise PreconditionError("xi must be >= 1")
    k = 2 * xi - 1
    if delta == 0.0:
        moment = 1.0 / k
    else:
        moment = ((1 - delta) ** k - delta**k) / (k * (1 - 2 * delta))
    return xi**2 / 4 * moment


class PuritySchedule(NamedTuple):
    delta: float
    purity_exact: float
    purity_paper_asymptotic: float


def purity_schedule(xi: int) -> PuritySchedule:
    """Input mixing ``delta(xi)`` that keeps the xi-separable variance from vanishing."""
    if xi < 2:
        raise DomainError("purity schedule is degenerate for xi < 2")
    delta = PURITY_LOG(xi) / (4 * xi - 4)
    return PuritySchedule(delta, (1 - delta) ** 2 + delta**2, (1 - delta) ** 2)


# -- slow variational Grover circuit ----------------------------------------------

def _slow_sum_correlated(theta, n: int, L: int):
    """``S(theta) = sum_l (-1)^l cos(n l theta / 2)`` and its derivative."""
    theta = np.asarray(theta, dtype=float)
    ell = np.arange(L, dtype=float)
    sign = (-1.0) ** ell
    ph = np.multiply.outer(theta, n * ell / 2)
    s = np.sum(sign * np.cos(ph), axis=-1)
    ds = -np.sum(sign * (n * ell / 2) * np.sin(ph), axis=-1)
    return s, ds


def slow_grover_amplitude(theta, n: int, L: int):
    """Ratio form ``sin((L-1)n t/4) sin(L n t/4) / cos(n t/4)`` and its derivative.

    Equals the alternating sum over equal partial sums; the sum form takes over
    where ``|cos(n t/4)|`` drops below the singular threshold.
    """
    theta = np.asarray(theta, dtype=float)
    a, b, c = (L - 1) * n * theta / 4, L * n * theta / 4, n * theta / 4
    sa, ca, sb, cb, sc, cc = np.sin(a), np.cos(a), np.sin(b), np.cos(b), np.sin(c), np.cos(c)
    singular = np.abs(cc) < SINGULAR_THRESHOLD
    safe = np.where(singular, 1.0, cc)
    s = sa * sb / safe
    ds = ((L - 1) * n / 4 * ca * sb + L * n / 4 * sa * cb) / safe + sa * sb * (n / 4) * sc / safe**2
    if np.any(singular):
        s_sum, ds_sum = _slow_sum_correlated(theta, n, L)
        s = np.where(singular, s_sum, s)
        ds = np.where(singular, ds_sum, ds)
    return s, ds


def slow_grover_coefficient(theta, n: int, L: int):
    """``f(theta)`` with ``C = 1 - gamma^2 f(theta) + O(gamma^4)`` (correlated angles)."""
    check_slow_grover(n, L)
    s, _ = slow_grover_amplitude(theta, n, L)
    return central_weight(n) * s * s


def slow_grover_coefficient_derivative(theta, n: int, L: int):
    check_slow_grover(n, L)
    s, ds = slow_grover_amplitude(theta, n, L)
    return 2 * central_weight(n) * s * ds


def grover_slow_cost_general(theta, gamma: float, n: int) -> ClosedFormValue:
    """O(gamma^2) cost of the slow Grover circuit with independent layer angles.

    ``theta`` has shape ``(..., L)``; the alternating sum runs over the partial
    sums ``0, theta_1, theta_1 + theta_2, ...``.
    """
    theta = np.asarray(theta, dtype=float)
    L = theta.shape[-1]
    check_slow_grover(n, L)
    s, _ = kernels.alternating_sum(theta.reshape(-1, L), n)
    s = s.reshape(theta.shape[:-1])
    return ClosedFormValue(1.0 - gamma**2 * central_weight(n) * s * s, OrderTag.ORDER_GAMMA_SQUARED)


def grad_grover_slow_general(theta, gamma: float, n: int) -> np.ndarray:
    """Partial derivatives of :func:`grover_slow_cost_general`, shape ``(..., L)``."""
    theta = np.asarray(theta, dtype=float)
    L = theta.shape[-1]
    check_slow_grover(n, L)
    s, ds = kernels.alternating_sum(theta.reshape(-1, L), n)
    grad = -2 * gamma**2 * central_weight(n) * s[:, None] * ds
    return grad.reshape(theta.shape)


def grover_slow_cost_correlated(theta, gamma: float, n: int, L: int) -> ClosedFormValue:
    return ClosedFormValue(
        1.0 - gamma**2 * slow_grover_coefficient(theta, n, L), OrderTag.ORDER_GAMMA_SQUARED
    )


def grad_grover_slow_correlated(theta, gamma: float, n: int, L: int):
    return -(gamma**2) * slow_grover_coefficient_derivative(theta, n, L)


def grover_slow_grad_bound(n: int, L: int, gamma: float) -> float:
    """Upper bound on ``(dC/dtheta)^2`` for the correlated slow Grover cost."""
    check_slow_grover(n, L)
    log_b = 2 * log_binomial(n, n // 2) + 2 * math.log(n) + 4 * math.log(gamma) - (4 * n - 2) * math.log(2)
    return math.exp(log_b) * 4 * L**6 / 9


def chebyshev_tail(variance: float, epsilon: float) -> float:
    """``min(1, variance / epsilon^2)``, a bound on ``P(|X| >= epsilon)`` for zero-mean X."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if variance < 0:
        raise DomainError("variance must be non-negative")
    return min(1.0, variance / epsilon**2)


def grover_slow_grad_expectation_lb(n: int, L: int, gamma: float) -> float:
    """Published lower bound ``C(n,n/2) gamma^2 n L^2 / (pi 2^(2n))`` on ``E|dC/dtheta|``."""
    check_slow_grover(n, L)
    return math.exp(log_binomial(n, n // 2) - 2 * n * math.log(2)) * gamma**2 * n * L**2 / math.pi


def grover_slow_grad_expectation_lb_rederived(n: int, L: int, gamma: float) -> float:
    """The same bound recomputed from the integral over the monotone interval.

    ``(1/2pi) |C(2pi/n) - C(2pi(L-2)/(n(L-1)))|`` has no factor of ``n``.
    """
    check_slow_grover(n, L)
    return math.exp(log_binomial(n, n // 2) - 2 * n * math.log(2)) * gamma**2 * L**2 / math.pi


def grover_slow_grad_expectation_lb_asymptotic(n: int, L: int, gamma: float) -> float:
    return math.sqrt(2 * n) * L**2 / (math.pi**1.5 * 2.0**n) * gamma**2


def grover_slow_uncorrelated_layer_bound(n: int, L: int, k: int, gamma: float) -> float:
    """Bound on ``(dC/dtheta_k)^2`` when the layer angles vary independently (1-based k)."""
    if not 1 <= k <= L:
        raise PreconditionError(f"layer index k={k} outside 1..{L}")
    log_b = 2 * log_binomial(n, n // 2) + 4 * math.log(gamma) + 2 * math.log(n) - (4 * n - 2) * math.log(2)
    return math.exp(log_b) * (L - 1) ** 2 * (L - k) ** 2


# -- ring of disagrees ------------------------------------------------------------

def _mixer_tail_sums(beta):
    """``x_j = beta_{j+1} + ... + beta_L`` along the last axis (0-based ``j``)."""
    beta = np.asarray(beta, dtype=float)
    return np.flip(np.cumsum(np.flip(beta, -1), -1), -1)


def rod_local_cost_linear(beta, gamma, n: int) -> ClosedFormValue:
    beta = np.asarray(beta, dtype=float)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), beta.shape)
    x = _mixer_tail_sums(beta)
    return ClosedFormValue(n / 2 + n / 2 * np.sum(gamma * np.sin(2 * x), axis=-1), OrderTag.ORDER_GAMMA_LINEAR)


def grad_rod_local(beta, gamma, n: int) -> np.ndarray:
    """``dC/dbeta_i = n sum_{j <= i} gamma_j cos(2 x_j)``."""
    beta = np.asarray(beta, dtype=float)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), beta.shape)
    x = _mixer_tail_sums(beta)
    return n * np.cumsum(gamma * np.cos(2 * x), axis=-1)


def _dirichlet_ratio(beta, L: int):
    """``(cos((2L+1)b) - cos b) / sin b`` and its derivative.

    Near ``sin b = 0`` both switch to the equivalent finite sums
    ``-2 sum_k sin(2kb)`` and ``-4 sum_k k cos(2kb)``.
    """
    beta = np.asarray(beta, dtype=float)
    m = 2 * L + 1
    sb, cb = np.sin(beta), np.cos(beta)
    singular = np.abs(sb) < SINGULAR_THRESHOLD
    safe = np.where(singular, 1.0, sb)
    num = np.cos(m * beta) - cb
    r = num / safe
    dr = (-m * np.sin(m * beta) + sb) / safe - num * cb / safe**2
    if np.any(singular):
        k = np.arange(1, L + 1, dtype=float)
        ph = np.multiply.outer(beta, 2 * k)
        r = np.where(singular, -2 * np.sum(np.sin(ph), axis=-1), r)
        dr = np.where(singular, -4 * np.sum(k * np.cos(ph), axis=-1), dr)
    return r, dr


def rod_global_cost_linear(beta, gamma: float, n: int, L: int) -> ClosedFormValue:
    """O(gamma) projection onto the two maximum-cut states, correlated layers."""
    check_even(n)
    if n < 4:
        raise PreconditionError("ring-global cost needs n >= 4")
    r, _ = _dirichlet_ratio(beta, L)
    return ClosedFormValue(2.0 ** (1 - n) - n * gamma / 2.0**n * r, OrderTag.ORDER_GAMMA_LINEAR)


def grad_rod_global(beta, gamma: float, n: int, L: int):
    _, dr = _dirichlet_ratio(beta, L)
    return -n * gamma / 2.0**n * dr


def rod_global_secondmoment_asymptotic(n: int, L: int, gamma: float) -> float:
    """Published large-L form ``(2L+1)^3 n^2 gamma^2 / 2^(2n)`` of ``E[(dC/dbeta)^2]``."""
    if L < 1:
        raise PreconditionError("L must be >= 1")
    return (2 * L + 1) ** 3 * n**2 * gamma**2 / 2.0 ** (2 * n)


def rod_global_secondmoment_linear_exact(n: int, L: int, gamma: float) -> float:
    """Exact ``E[(dC/dbeta)^2]`` of the O(gamma) ring-global cost over uniform beta.

    From ``dC/dbeta = (n gamma / 2^(n-1)) sum_k 2k cos(2 k beta)``:
    ``(4/3) L (L+1) (2L+1) n^2 gamma^2 / 2^(2n)``, tending to a third of
    :func:`rod_global_secondmoment_asymptotic`.
    """
    return 4 / 3 * L * (L + 1) * (2 * L + 1) * n**2 * gamma**2 / 2.0 ** (2 * n)


def rod_global_absgrad_lb(n: int, L: int, gamma: float) -> float:
    if L < 1:
        raise PreconditionError("L must be >= 1")
    m = 2 * L + 1
    return m * n * gamma * math.log(m) / (math.pi**2 * 2.0 ** (n - 1))
