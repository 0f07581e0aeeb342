"""Pure numpy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is unavailable or ``BPL_PURE_PYTHON=1``.
"""
import numpy as np


def alternating_sum(theta, n):
    """Alternating cosine sum over partial sums, with its gradient.

    For each row ``t`` of ``theta`` (shape ``(S, L)``) returns
    ``s = sum_l (-1)^l cos(n T_l / 2)`` with ``T_0 = 0``,
    ``T_l = t_0 + ... + t_{l-1}``, and ``ds[k] = ds/dt_k``.
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    S, L = theta.shape
    partial = np.zeros((S, L))
    np.cumsum(theta[:, :-1], axis=1, out=partial[:, 1:])
    sign = np.where(np.arange(L) % 2, -1.0, 1.0)
    x = 0.5 * n * partial
    s = np.cos(x) @ sign
    terms = sign * np.sin(x) * (0.5 * n)
    # ds[k] = -sum_{l > k} terms[l]
    tail = np.cumsum(terms[:, ::-1], axis=1)[:, ::-1]
    ds = np.zeros((S, L))
    ds[:, :-1] = -tail[:, 1:]
    return s, ds


def layered_overlaps(w, e0, init, target, alphas, gammas):
    """``<target| prod_k exp(i a_k J_y) exp(i g_k |0><0|) |init>`` per row of ``alphas``.

    All vectors are in the J_y eigenbasis with eigenvalues ``w``; ``e0`` holds
    the components of ``|0...0>``.  ``alphas`` is ``(S, L)``, ``gammas`` ``(L,)``.
    """
    w = np.asarray(w, dtype=np.float64)
    e0 = np.asarray(e0, dtype=np.complex128)
    alphas = np.ascontiguousarray(alphas, dtype=np.float64)
    S, L = alphas.shape
    state = np.repeat(np.asarray(init, dtype=np.complex128)[None, :], S, axis=0)
    e0c = e0.conj()
    for k in range(L):
        f = np.exp(1j * gammas[k]) - 1.0
        proj = state @ e0c
        state += f * proj[:, None] * e0[None, :]
        state *= np.exp(1j * alphas[:, k, None] * w[None, :])
    return state @ np.asarray(target, dtype=np.complex128).conj()


def layered_trace(w, e0, init, target, alpha, gamma, L):
    """Overlaps with ``target`` after 0, 1, ..., L identical layers."""
    w = np.asarray(w, dtype=np.float64)
    e0 = np.asarray(e0, dtype=np.complex128)
    e0c = e0.conj()
    tc = np.asarray(target, dtype=np.complex128).conj()
    state = np.array(init, dtype=np.complex128)
    phase = np.exp(1j * alpha * w)
    f = np.exp(1j * gamma) - 1.0
    out = np.empty(L + 1, dtype=np.complex128)
    out[0] = state @ tc
    for k in range(L):
        state += f * (state @ e0c) * e0
        state *= phase
        out[k + 1] = state @ tc
    return out
