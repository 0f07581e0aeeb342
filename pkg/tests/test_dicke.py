import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bpl import dicke, statevec
from bpl.core import DimensionMismatch, ParityError, PoleError, SizeError
from bpl.dicke import Axis, DickeVector


def test_collective_matrix_examples():
    assert np.allclose(dicke.collective_matrix(Axis.Z, 2).matrix, np.diag([-1, 0, 1]))
    # ascending m puts |1> first; flip to the (|0>, |1>) qubit order
    jy = dicke.collective_matrix(Axis.Y, 1).matrix[::-1, ::-1]
    assert np.allclose(jy, 0.5 * np.array([[0, -1j], [1j, 0]]))
    assert list(dicke.collective_matrix(Axis.X, 4).eigenvalues) == [-2, -1, 0, 1, 2]


@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_commutation_relation(n):
    jx, jy, jz = (dicke.collective_matrix(a, n).matrix for a in (Axis.X, Axis.Y, Axis.Z))
    assert np.allclose(jx @ jy - jy @ jx, 1j * jz)
    j = n / 2
    assert np.allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(n + 1))


def test_generator_arrays_read_only():
    gen = dicke.collective_matrix(Axis.Y, 4)
    with pytest.raises(ValueError):
        gen.eigenvectors[0, 0] = 0
    with pytest.raises(SizeError):
        dicke.collective_matrix(Axis.X, dicke.MAX_N + 1)


def test_eigenvector_phase_convention():
    v = dicke.collective_matrix(Axis.Y, 6).eigenvectors
    top = v[-1, :]
    assert np.allclose(top.imag, 0) and np.all(top.real >= 0)


def test_rotate_examples():
    psi = DickeVector(3, np.array([0.1, 0.5j, -0.3, 0.8]) / np.linalg.norm([0.1, 0.5, 0.3, 0.8]))
    assert np.allclose(dicke.rotate(psi, Axis.Y, 0.0).amps, psi.amps)
    back = dicke.rotate(dicke.rotate(psi, Axis.Y, 0.77), Axis.Y, -0.77)
    assert np.allclose(back.amps, psi.amps, atol=1e-12)
    flipped = dicke.rotate(dicke.all_zeros(1), Axis.Y, math.pi)
    assert abs(flipped.amps[0]) == pytest.approx(1)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.sampled_from(list(Axis)), st.floats(-10, 10))
def test_rotation_preserves_norm(n, axis, angle):
    rng = np.random.default_rng(n)
    v = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    psi = DickeVector(n, v / np.linalg.norm(v))
    assert dicke.rotate(psi, axis, angle).norm == pytest.approx(1, abs=1e-12)


def test_oracle_phase_examples():
    rng = np.random.default_rng(1)
    psi = DickeVector(4, rng.normal(size=5) + 0j)
    assert np.allclose(dicke.oracle_phase(psi, 0).amps, psi.amps)
    assert np.allclose(dicke.oracle_phase(psi, 2 * math.pi).amps, psi.amps)
    out = dicke.oracle_phase(psi, math.pi).amps
    assert out[-1] == pytest.approx(-psi.amps[-1]) and np.allclose(out[:-1], psi.amps[:-1])


@pytest.mark.parametrize("n", [2, 4, 8, 16])
def test_phi_states(n):
    p1, p2 = dicke.phi1(n), dicke.phi2(n)
    assert p1.norm == pytest.approx(1) and abs(p2.overlap(p1)) < 1e-12
    assert abs(p2.amps[-1]) ** 2 == pytest.approx(math.comb(n, n // 2) / 2**n)
    # both extremal J_y states have |amplitude|^2 = 2^-n on |0...0>; phases align
    assert abs(p1.amps[-1]) ** 2 == pytest.approx(2 / 2**n)


def test_phi2_two_qubits():
    assert abs(dicke.phi2(2).amps[-1]) ** 2 == pytest.approx(0.5)
    with pytest.raises(ParityError):
        dicke.phi1(3)


def test_phi1_is_pair_of_coherent_states():
    n = 6
    expected = dicke.coherent_state(1j, n).amps + dicke.coherent_state(-1j, n).amps
    p1 = dicke.phi1(n).amps
    assert abs(np.vdot(expected / np.linalg.norm(expected), p1)) == pytest.approx(1)


def test_coherent_state_examples():
    z0 = dicke.coherent_state(0, 5)
    assert z0.amps[-1] == 1 and np.count_nonzero(z0.amps) == 1
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(1, 13))
        z, zp = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        direct = dicke.coherent_state(z, n).overlap(dicke.coherent_state(zp, n))
        assert direct == pytest.approx(dicke.coherent_overlap(z, zp, n), abs=1e-12)


def test_coherent_state_matches_rotation():
    # exp(-i a J_y)|0...0> is the coherent state with z = tan(a/2)
    n, a = 7, 0.9
    rotated = dicke.rotate(dicke.all_zeros(n), Axis.Y, a)
    coh = dicke.coherent_state(math.tan(a / 2), n)
    assert abs(rotated.overlap(coh)) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("phi", [0.0, 0.4, 2.5, 5.9])
def test_phi2_overlap_independent_of_rotation(phi):
    n = 10
    state = dicke.rotate(dicke.coherent_state(0, n), Axis.Y, -phi)
    assert abs(dicke.phi2(n).overlap(state)) ** 2 == pytest.approx(math.comb(n, n // 2) / 2**n)


def test_coherent_overlap_examples():
    z = 0.3 - 0.8j
    assert dicke.coherent_overlap(z, z, 9) == pytest.approx(1)
    assert dicke.coherent_overlap(0, z, 9) == pytest.approx((1 + abs(z) ** 2) ** (-4.5))


def test_rotated_coherent_parameter_examples():
    z = 0.4 + 0.2j
    assert dicke.rotated_coherent_parameter(z, 0.0) == pytest.approx(z)
    assert dicke.rotated_coherent_parameter(0, math.pi / 4) == pytest.approx(-1)
    with pytest.raises(PoleError):
        dicke.rotated_coherent_parameter(0, math.pi / 2)


def test_rotated_coherent_parameter_vector_oracle():
    rng = np.random.default_rng(11)
    n = 8
    for _ in range(50):
        z = complex(*rng.normal(size=2))
        a = float(rng.uniform(-math.pi, math.pi))
        try:
            zp = dicke.rotated_coherent_parameter(z, a)
        except PoleError:
            continue
        rotated = dicke.rotate(dicke.coherent_state(z, n), Axis.Y, -2 * a)
        assert abs(rotated.overlap(dicke.coherent_state(zp, n))) == pytest.approx(1, abs=1e-10)


def test_grover_cost_examples():
    n = 4
    assert dicke.grover_cost_exact(1.3, math.pi, n, 0) == pytest.approx(1 - 2 / 2**n)
    alpha, L = 0.7, 5
    rotated = dicke.rotate(dicke.phi1(n), Axis.Y, -L * alpha)
    assert dicke.grover_cost_exact(alpha, 0.0, n, L) == pytest.approx(1 - abs(rotated.amps[-1]) ** 2)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 4, 6, 10]), st.integers(0, 7), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_fast_path_matches_gate_by_gate(n, L, alpha, gamma):
    ref = dicke.grover_state([alpha] * L, [gamma] * L, dicke.phi1(n))
    assert dicke.grover_cost_exact(alpha, gamma, n, L) == pytest.approx(1 - abs(ref.amps[-1]) ** 2, abs=1e-12)


def test_trace_matches_per_depth():
    tr = dicke.grover_cost_trace(0.6, math.pi, 8, 12)
    per = [dicke.grover_cost_exact(0.6, math.pi, 8, L) for L in range(13)]
    assert np.allclose(tr, per, atol=1e-12)


def test_grover_cost_vectorized():
    alpha = np.linspace(0, 2 * math.pi, 7).reshape(7, 1)
    out = dicke.grover_cost_exact(alpha, math.pi, 6, 3)
    assert out.shape == (7, 1)
    assert out[2, 0] == pytest.approx(dicke.grover_cost_exact(float(alpha[2, 0]), math.pi, 6, 3))


def test_grover_fidelity_improves_with_n():
    best = [dicke.grover_cost_trace(2 * math.pi / n, math.pi, n, math.ceil(4 * 2 ** (n / 2)))[1:].min()
            for n in (8, 12, 16)]
    assert best[0] > best[1] > best[2]


def test_slow_cost_examples():
    assert dicke.grover_slow_cost_exact(np.full(8, 0.3), 0.0, 8) == pytest.approx(1, abs=1e-12)
    theta = np.random.default_rng(2).uniform(0, 2 * math.pi, (3, 8))
    out = dicke.grover_slow_cost_exact(theta, 0.2, 6)
    assert out.shape == (3,)
    with pytest.raises(ParityError):
        dicke.grover_slow_cost_exact(np.zeros(6), 0.1, 4)


def test_slow_cost_gate_by_gate():
    n, g = 6, 0.4
    theta = np.random.default_rng(5).uniform(0, 2 * math.pi, 8)
    state = dicke.phi1(n)
    for k, t in enumerate(theta):
        state = dicke.rotate(dicke.oracle_phase(state, g if k % 2 == 0 else -g), Axis.Y, -t)
    expected = 1 - abs(dicke.phi2(n).overlap(state)) ** 2
    assert dicke.grover_slow_cost_exact(theta, g, n) == pytest.approx(expected, abs=1e-12)


def test_jxjy_examples():
    assert dicke.jxjy_cost_exact([0.0, 0.0], [0.0, 0.0], 6) == pytest.approx(1)
    n = 64
    assert dicke.jxjy_cost_exact([math.pi * math.sqrt(n)], [0.0], n) < 1e-15
    with pytest.raises(DimensionMismatch):
        dicke.jxjy_cost_exact([0.1], [0.1, 0.2], 4)


def test_jxjy_against_statevector():
    n = 5
    beta, alpha = [0.4, -1.1], [0.9, 0.3]
    sv = statevec.basis(n)
    for b, a in zip(beta, alpha):
        sv = statevec.product_rotation(sv, np.full(n, a / math.sqrt(n)), Axis.Y)
        sv = statevec.product_rotation(sv, np.full(n, b / math.sqrt(n)), Axis.X)
    assert dicke.jxjy_cost_exact(beta, alpha, n) == pytest.approx(abs(sv.amps[0]) ** 2, abs=1e-12)
