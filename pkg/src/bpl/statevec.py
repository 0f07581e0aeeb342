"""Full 2^n statevector simulator (n <= 14) and the ring-of-disagrees QAOA circuit.

Basis ordering: bit ``q`` of the index is qubit ``q + 1``; ``|0...0>`` is
index 0.  Besides the ring circuit, this module is the independent reference
for the collective-spin simulator in :mod:`bpl.dicke`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .core import DimensionMismatch, ParityError, SizeError
from .dicke import Axis, DickeVector

MAX_QUBITS = 14


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise SizeError(f"n={self.n} outside 1..{MAX_QUBITS}")
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (1 << self.n,):
            raise DimensionMismatch(f"expected {1 << self.n} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def basis(n: int, index: int = 0) -> StateVector:
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(n, amps)


def _pauli_rotation(axis: Axis, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis is Axis.X:
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis is Axis.Y:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.diag([complex(c, -s), complex(c, s)])


def apply_single(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    """Apply a 2x2 ``u`` on qubit ``q`` (0-based bit position)."""
    view = amps.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.einsum("ij,ajb->aib", u, view).reshape(-1)


def product_rotation(state: StateVector, angles, axis: Axis | str) -> StateVector:
    """Apply ``prod_j exp(-i angles[j]/2 sigma_axis^(j))``."""
    axis = Axis(axis)
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (state.n,):
        raise DimensionMismatch(f"need {state.n} angles, got {angles.shape}")
    amps = state.amps
    for q, t in enumerate(angles):
        amps = apply_single(amps, state.n, q, _pauli_rotation(axis, float(t)))
    return StateVector(state.n, amps)


def phase_on_zero(state: StateVector, gamma: float) -> StateVector:
    """``exp(i gamma |0...0><0...0|)``."""
    amps = state.amps.copy()
    amps[0] *= np.exp(1j * gamma)
    return StateVector(state.n, amps)


def popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return ((idx[:, None] >> np.arange(n)) & 1).sum(axis=1)


def embed_dicke(dicke: DickeVector) -> StateVector:
    """Spread Dicke amplitudes over the bitstrings of each Hamming weight."""
    n = dicke.n
    if n > MAX_QUBITS:
        raise SizeError(f"cannot embed n={n} > {MAX_QUBITS}")
    k = popcounts(n)
    binom = np.array([math.comb(n, int(j)) for j in range(n + 1)], dtype=float)
    amps = dicke.amps[n - k] / np.sqrt(binom[k])
    return StateVector(n, amps / np.linalg.norm(amps))


# -- ring of disagrees --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RingCostDiagonal:
    n: int
    values: np.ndarray


@lru_cache(maxsize=None)
def ring_cost_diagonal(n: int) -> RingCostDiagonal:
    """Diagonal of ``n/2 - (1/2) sum_j Z_j Z_{j+1}`` (periodic), i.e. the cut size."""
    if not 3 <= n <= MAX_QUBITS:
        raise SizeError(f"ring needs 3 <= n <= {MAX_QUBITS}")
    bits = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    z = 1 - 2 * bits
    values = n / 2 - 0.5 * np.sum(z * np.roll(z, -1, axis=1), axis=1)
    values.setflags(write=False)
    return RingCostDiagonal(n, values)


def _check_ring(n: int) -> None:
    if n % 2:
        raise ParityError(f"ring QAOA needs even n, got {n}")
    if not 4 <= n <= MAX_QUBITS:
        raise SizeError(f"ring QAOA needs 4 <= n <= {MAX_QUBITS}")


def _mixer_batch(states: np.ndarray, beta: np.ndarray, n: int) -> np.ndarray:
    """``exp(-i beta_g J_x)`` on each row ``g`` of ``states`` (shape ``(G, 2^n)``)."""
    c = np.cos(beta / 2)[:, None, None]
    s = -1j * np.sin(beta / 2)[:, None, None]
    G = states.shape[0]
    for q in range(n):
        view = states.reshape(G, 1 << (n - q - 1), 2, 1 << q)
        a0, a1 = view[:, :, 0, :], view[:, :, 1, :]
        states = np.stack([c * a0 + s * a1, s * a0 + c * a1], axis=2).reshape(G, -1)
    return states


def ring_qaoa_states(beta, gamma, n: int) -> np.ndarray:
    """Batched ring QAOA: ``beta``, ``gamma`` of shape ``(G, L)``; returns ``(G, 2^n)``."""
    _check_ring(n)
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    if beta.shape != gamma.shape:
        raise DimensionMismatch("beta and gamma layer counts differ")
    diag = ring_cost_diagonal(n).values
    G, L = beta.shape
    states = np.full((G, 1 << n), 2.0 ** (-n / 2), dtype=np.complex128)
    for k in range(L):
        states = states * np.exp(-1j * np.outer(gamma[:, k], diag))
        states = _mixer_batch(states, beta[:, k], n)
    return states


def ring_qaoa_state(beta, gamma, n: int) -> StateVector:
    """Driver ``exp(-i gamma_k C)`` then mixer ``exp(-i beta_k J_x)``, k = 1..L, on ``|+>^n``."""
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if beta.ndim != 1 or beta.shape != gamma.shape:
        raise DimensionMismatch("beta and gamma must be equal-length sequences")
    return StateVector(n, ring_qaoa_states(beta[None, :], gamma[None, :], n)[0])


def cost_ring_local(state: StateVector) -> float:
    diag = ring_cost_diagonal(state.n).values
    return float(np.dot(diag, np.abs(state.amps) ** 2))


def max_cut_indices(n: int) -> tuple[int, int]:
    """Indices of ``(|0>|1>)^(n/2)`` and ``(|1>|0>)^(n/2)``."""
    if n % 2:
        raise ParityError(f"alternating cut states need even n, got {n}")
    odd = sum(1 << q for q in range(1, n, 2))
    even = sum(1 << q for q in range(0, n, 2))
    return odd, even


def cost_ring_global(state: StateVector) -> float:
    i1, i2 = max_cut_indices(state.n)
    return float(abs(state.amps[i1]) ** 2 + abs(state.amps[i2]) ** 2)


class QaoaOptimum(NamedTuple):
    beta: float
    gamma: float
    value: float


def _local_costs(beta: np.ndarray, gamma: np.ndarray, n: int, L: int) -> np.ndarray:
    states = ring_qaoa_states(np.repeat(beta[:, None], L, 1), np.repeat(gamma[:, None], L, 1), n)
    return (np.abs(states) ** 2) @ ring_cost_diagonal(n).values


def maximize_correlated_qaoa(n: int, L: int, grid: int = 32, refinements: int = 200) -> QaoaOptimum:
    """Maximize the local ring cost with all betas equal and all gammas equal.

    Grid search over ``[-pi, pi) x [0, pi/2)`` (ties go to the
    lexicographically smallest ``(beta, gamma)``), then a coordinate pattern
    search starting at the grid spacing, halving the step whenever a pass
    finds no improvement, until the step drops below 1e-6.
    """
    if not 4 <= n <= 10:
        raise SizeError(f"correlated QAOA search supports 4 <= n <= 10, got {n}")
    _check_ring(n)
    if not 1 <= L <= 6:
        raise SizeError(f"correlated QAOA search supports 1 <= L <= 6, got {L}")
    hb, hg = 2 * math.pi / grid, (math.pi / 2) / grid
    bb, gg = np.meshgrid(-math.pi + hb * np.arange(grid), hg * np.arange(grid), indexing="ij")
    values = _local_costs(bb.ravel(), gg.ravel(), n, L)
    best = int(np.argmax(values))
    beta, gamma, value = float(bb.ravel()[best]), float(gg.ravel()[best]), float(values[best])

    scale = 1.0
    for _ in range(refinements):
        if scale * max(hb, hg) < 1e-6:
            break
        cand_b = np.array([beta + scale * hb, beta - scale * hb, beta, beta])
        cand_g = np.array([gamma, gamma, min(gamma + scale * hg, math.pi / 2), max(gamma - scale * hg, 0.0)])
        cand_b = (cand_b + math.pi) % (2 * math.pi) - math.pi
        vals = _local_costs(cand_b, cand_g, n, L)
        j = int(np.argmax(vals))
        if vals[j] > value:
            beta, gamma, value = float(cand_b[j]), float(cand_g[j]), float(vals[j])
        else:
            scale /= 2
    return QaoaOptimum(beta, gamma, value)
