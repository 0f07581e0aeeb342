"""Exact simulation of collective-spin circuits in the (n+1)-dim symmetric subspace.

Amplitudes are indexed by ``m = -n/2, ..., n/2`` ascending, so index ``n``
(``m = +n/2``) is ``|0...0>``.  Rotations go through a cached eigensystem of
each generator.  The Grover-type circuits use only J_y rotations and phases on
``|0...0>``; their fast paths run in the J_y eigenbasis, where every rotation
is diagonal (see :mod:`bpl.kernels`).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .core import DimensionMismatch, ParityError, PoleError, SizeError, check_slow_grover, log_binomial

MAX_N = 128


class Axis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


@dataclass(frozen=True, eq=False)
class DickeVector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=np.complex128)
        if amps.shape != (self.n + 1,):
            raise DimensionMismatch(f"expected {self.n + 1} amplitudes, got {amps.shape}")
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def overlap(self, other: "DickeVector") -> complex:
        """``<self|other>``."""
        if other.n != self.n:
            raise DimensionMismatch("overlap of vectors with different n")
        return complex(np.vdot(self.amps, other.amps))


@dataclass(frozen=True, eq=False)
class CollectiveGenerator:
    axis: Axis
    n: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def unitary(self, angle: float) -> np.ndarray:
        """``exp(-i angle J_axis)`` as a dense matrix."""
        v = self.eigenvectors
        return (v * np.exp(-1j * angle * self.eigenvalues)) @ v.conj().T


def _ladder(n: int) -> np.ndarray:
    j = n / 2
    m = np.arange(-j, j + 1)
    jp = np.zeros((n + 1, n + 1))
    idx = np.arange(n)
    jp[idx + 1, idx] = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    return jp


@lru_cache(maxsize=None)
def collective_matrix(axis: Axis | str, n: int) -> CollectiveGenerator:
    """``J_axis`` on spin n/2 with its eigensystem.

    Eigenvalues are snapped to the exact half-integers; each eigenvector is
    phased so that its ``|0...0>`` component is real and non-negative.
    """
    axis = Axis(axis)
    if not 1 <= n <= MAX_N:
        raise SizeError(f"n={n} outside 1..{MAX_N}")
    m = np.arange(-n / 2, n / 2 + 1)
    if axis is Axis.Z:
        mat = np.diag(m).astype(np.complex128)
        vals, vecs = m.copy(), np.eye(n + 1, dtype=np.complex128)
    else:
        jp = _ladder(n)
        mat = (jp + jp.T) / 2 if axis is Axis.X else (jp - jp.T) / 2j
        mat = mat.astype(np.complex128)
        vals, vecs = np.linalg.eigh(mat)
        vals = np.round(vals * 2) / 2
        top = vecs[-1, :]
        mag = np.abs(top)
        vecs = vecs * np.where(mag > 1e-300, top.conj() / np.where(mag > 1e-300, mag, 1.0), 1.0)
    for arr in (mat, vals, vecs):
        arr.setflags(write=False)
    return CollectiveGenerator(axis, n, mat, vals, vecs)


def basis_state(n: int, m: float) -> DickeVector:
    amps = np.zeros(n + 1, dtype=np.complex128)
    amps[int(round(m + n / 2))] = 1.0
    return DickeVector(n, amps)


def all_zeros(n: int) -> DickeVector:
    return basis_state(n, n / 2)


def rotate(state: DickeVector, axis: Axis | str, angle: float) -> DickeVector:
    """Apply ``exp(-i angle J_axis)``."""
    gen = collective_matrix(axis, state.n)
    v = gen.eigenvectors
    amps = v @ (np.exp(-1j * angle * gen.eigenvalues) * (v.conj().T @ state.amps))
    return DickeVector(state.n, amps)


def oracle_phase(state: DickeVector, gamma: float) -> DickeVector:
    """Apply ``exp(i gamma |0...0><0...0|)``."""
    amps = state.amps.copy()
    amps[-1] *= np.exp(1j * gamma)
    return DickeVector(state.n, amps)


def _y_eigvec(n: int, m: float) -> np.ndarray:
    gen = collective_matrix(Axis.Y, n)
    return gen.eigenvectors[:, int(round(m + n / 2))]


def phi1(n: int) -> DickeVector:
    """Equal superposition of the lowest and highest J_y weight vectors."""
    if n < 2 or n % 2:
        raise ParityError(f"phi1 is defined for even n >= 2, got {n}")
    return DickeVector(n, (_y_eigvec(n, -n / 2) + _y_eigvec(n, n / 2)) / math.sqrt(2))


def phi2(n: int) -> DickeVector:
    """The zero-weight J_y eigenvector."""
    if n < 2 or n % 2:
        raise ParityError(f"phi2 is defined for even n >= 2, got {n}")
    return DickeVector(n, _y_eigvec(n, 0).copy())


def coherent_state(z: complex, n: int) -> DickeVector:
    """``(1+|z|^2)^(-n/2) exp(z J_-) |0...0>``."""
    k = np.arange(n + 1)
    logw = 0.5 * np.array([log_binomial(n, int(kk)) for kk in k])
    z = complex(z)
    if z == 0:
        amps_k = (k == 0).astype(np.complex128)
    else:
        amps_k = np.exp(logw + k * np.log(abs(z)) - 0.5 * n * math.log1p(abs(z) ** 2)) * np.exp(1j * k * np.angle(z))
    # k lowered spins <-> m = n/2 - k, stored ascending in m
    return DickeVector(n, amps_k[::-1].astype(np.complex128))


def coherent_overlap(z: complex, zp: complex, n: int) -> complex:
    z, zp = complex(z), complex(zp)
    norm = ((1 + abs(z) ** 2) * (1 + abs(zp) ** 2)) ** (-n / 2)
    return norm * (1 + z.conjugate() * zp) ** n


def rotated_coherent_parameter(z: complex, a: float) -> complex:
    """Label of ``exp(2 i a J_y)|z>``, i.e. ``(z cos a - sin a) / (z sin a + cos a)``."""
    z = complex(z)
    s, c = math.sin(a), math.cos(a)
    den = z * s + c
    if abs(den) < 1e-14:
        raise PoleError("rotated coherent state leaves the chart (label at infinity)")
    return (z * c - s) / den


# -- Grover-type circuits ---------------------------------------------------------

@lru_cache(maxsize=None)
def _ybasis(n: int):
    """J_y spectrum, ``|0...0>`` and ``phi1``/``phi2`` expressed in the J_y eigenbasis."""
    gen = collective_matrix(Axis.Y, n)
    w = gen.eigenvalues
    e0 = gen.eigenvectors[-1, :].conj().copy()
    p1 = np.zeros(n + 1, dtype=np.complex128)
    p1[0] = p1[-1] = 1 / math.sqrt(2)
    p2 = np.zeros(n + 1, dtype=np.complex128)
    p2[n // 2] = 1.0
    return w, e0, p1, p2


def grover_state(alphas, gammas, init: DickeVector) -> DickeVector:
    """Reference path: layers of ``exp(i g_k C)`` then ``exp(i a_k J_y)`` on ``init``.

    Gate-by-gate in the Dicke (J_z) basis; the fast paths below must agree.
    """
    state = init
    for a, g in zip(alphas, gammas):
        state = rotate(oracle_phase(state, g), Axis.Y, -a)
    return state


def grover_cost_layers(alphas, gamma: float, n: int) -> np.ndarray:
    """Eq.-(23)-type cost with per-layer angles; ``alphas`` is ``(S, L)``."""
    if n % 2:
        raise ParityError(f"Grover cost needs even n, got {n}")
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    w, e0, p1, _ = _ybasis(n)
    amp = kernels.layered_overlaps(w, e0, p1, e0, alphas, np.full(alphas.shape[1], float(gamma)))
    return 1.0 - np.abs(amp) ** 2


def grover_cost_exact(alpha, gamma: float, n: int, L: int):
    """``1 - |<0...0| R(alpha, gamma)_L |phi1>|^2`` with all layer angles equal.

    ``alpha`` may be an array; the result has the same shape.
    """
    if n % 2:
        raise ParityError(f"Grover cost needs even n, got {n}")
    alpha = np.asarray(alpha, dtype=float)
    flat = np.repeat(alpha.reshape(-1, 1), L, axis=1)
    out = grover_cost_layers(flat, gamma, n)
    return out.reshape(alpha.shape) if alpha.ndim else float(out[0])


def grover_cost_trace(alpha: float, gamma: float, n: int, L_max: int) -> np.ndarray:
    """Costs for ``L = 0, 1, ..., L_max`` in one pass."""
    if n % 2:
        raise ParityError(f"Grover cost needs even n, got {n}")
    w, e0, p1, _ = _ybasis(n)
    amp = kernels.layered_trace(w, e0, p1, e0, float(alpha), float(gamma), int(L_max))
    return 1.0 - np.abs(amp) ** 2


def grover_slow_cost_exact(theta, gamma: float, n: int):
    """``1 - |<phi2| M(theta, gamma)_L |phi1>|^2`` for layer angles ``theta``.

    Layer pattern: ``exp(i g C)``, ``exp(i theta_1 J_y)``, ``exp(-i g C)``,
    ``exp(i theta_2 J_y)``, ...  ``theta`` may be ``(L,)`` or ``(S, L)``.
    """
    theta = np.asarray(theta, dtype=float)
    L = theta.shape[-1]
    check_slow_grover(n, L)
    w, e0, p1, p2 = _ybasis(n)
    gammas = np.where(np.arange(L) % 2, -gamma, gamma).astype(float)
    amp = kernels.layered_overlaps(w, e0, p1, p2, theta.reshape(-1, L), gammas)
    out = 1.0 - np.abs(amp) ** 2
    return out.reshape(theta.shape[:-1]) if theta.ndim > 1 else float(out[0])


def jxjy_cost_exact(beta, alpha, n: int) -> float:
    """Fidelity ``|<0...0| R(beta, alpha)_L |0...0>|^2`` with angles scaled by ``1/sqrt(n)``."""
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if beta.shape != alpha.shape:
        raise DimensionMismatch("beta and alpha must have the same length")
    state = all_zeros(n)
    scale = 1 / math.sqrt(n)
    for b, a in zip(beta, alpha):
        state = rotate(state, Axis.Y, a * scale)
        state = rotate(state, Axis.X, b * scale)
    return float(abs(state.amps[-1]) ** 2)
