"""Differentiation checked against finite differences and numpy's eigensolver."""
import math

import numpy as np
import pytest

from qinitopt.differentiation import (EXACT_QFIM_MAX_PARAMS, gradient,
                                      hermitian_eigenvalues,
                                      jacobi_eigendecomposition, qfim,
                                      qfim_block_diagonal, qfim_empirical,
                                      qfim_exact, stabilize)
from qinitopt.simulator import (Circuit, Gate, Observable, RY, RZ,
                                apply_circuit, build_hea,
                                build_strongly_entangling, build_two_design,
                                expectation)


def expectation_cost(circuit, obs):
    return lambda rows: expectation(apply_circuit(circuit, rows), obs)


def finite_difference_gradient(cost_fn, theta, h=1e-6):
    grad = np.zeros(len(theta))
    for mu in range(len(theta)):
        up = theta.copy()
        up[mu] += h
        down = theta.copy()
        down[mu] -= h
        grad[mu] = (cost_fn(up[None, :])[0] - cost_fn(down[None, :])[0]) / (2 * h)
    return grad


def finite_difference_qfim(circuit, theta, h=1e-5):
    """-2x the Hessian of the fidelity |<psi(theta)|psi(t)>|^2 at t = theta."""
    base = apply_circuit(circuit, theta)

    def fidelity(t):
        return abs(np.vdot(base, apply_circuit(circuit, t))) ** 2

    p = len(theta)
    fisher = np.zeros((p, p))
    for i in range(p):
        for j in range(i, p):
            if i == j:
                up = theta.copy(); up[i] += 2 * h
                down = theta.copy(); down[i] -= 2 * h
                d2 = (fidelity(up) - 2 * fidelity(theta) + fidelity(down)) / (4 * h * h)
            else:
                pp = theta.copy(); pp[i] += h; pp[j] += h
                pm = theta.copy(); pm[i] += h; pm[j] -= h
                mp = theta.copy(); mp[i] -= h; mp[j] += h
                mm = theta.copy(); mm[i] -= h; mm[j] -= h
                d2 = (fidelity(pp) - fidelity(pm) - fidelity(mp) + fidelity(mm)) / (4 * h * h)
            fisher[i, j] = fisher[j, i] = -2 * d2
    return fisher


def test_gradient_single_ry_closed_form():
    circ = Circuit(1, (Gate(RY, target=0, param_slots=(0,)),), 1)
    cost = expectation_cost(circ, Observable(terms=((1.0, "Z"),)))
    for theta in (0.0, 0.4, -1.3, 2.9):
        grad = gradient(circ, np.array([theta]), cost)
        assert abs(grad[0] + math.sin(theta)) < 1e-12


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(21)
    obs = Observable(terms=((0.5, "ZII"), (0.5, "IZI"), (0.25, "XXI"), (0.3, "IYZ")))
    for builder in (lambda: build_strongly_entangling(2, 3),
                    lambda: build_hea(2, 3),
                    lambda: build_two_design(2, 3, seed=1)):
        circ = builder()
        cost = expectation_cost(circ, obs)
        theta = rng.uniform(0, 2 * math.pi, circ.num_params)
        got = gradient(circ, theta, cost)
        want = finite_difference_gradient(cost, theta)
        assert np.max(np.abs(got - want)) < 1e-8


def test_gradient_shape_errors():
    circ = build_hea(1, 2)
    cost = expectation_cost(circ, Observable(terms=((1.0, "ZI"),)))
    with pytest.raises(ValueError):
        gradient(circ, np.zeros(3), cost)


def test_qfim_single_ry_is_one():
    circ = Circuit(1, (Gate(RY, target=0, param_slots=(0,)),), 1)
    fisher = qfim_exact(circ, [0.7])
    assert abs(fisher.entries[0, 0] - 1.0) < 1e-12
    assert fisher.fidelity == "exact"


def test_qfim_phase_direction_is_flat():
    # RZ on |0> changes only the global phase, so that direction carries
    # zero Fisher information
    circ = Circuit(1, (Gate(RZ, target=0, param_slots=(0,)),
                       Gate(RY, target=0, param_slots=(1,))), 2)
    fisher = qfim_exact(circ, [0.9, 0.4]).entries
    assert abs(fisher[0, 0]) < 1e-12
    assert abs(fisher[0, 1]) < 1e-12


def test_qfim_exact_matches_finite_differences():
    rng = np.random.default_rng(22)
    for circ in (build_strongly_entangling(2, 3), build_hea(2, 3),
                 build_two_design(3, 3, seed=4)):
        theta = rng.uniform(0, 2 * math.pi, circ.num_params)
        got = qfim_exact(circ, theta).entries
        want = finite_difference_qfim(circ, theta)
        assert np.max(np.abs(got - want)) < 1e-4


def test_qfim_symmetric_and_psd():
    rng = np.random.default_rng(23)
    for _ in range(5):
        circ = build_hea(3, 3)
        theta = rng.uniform(0, 2 * math.pi, circ.num_params)
        fisher = qfim_exact(circ, theta).entries
        assert np.array_equal(fisher, fisher.T)
        assert np.min(np.linalg.eigvalsh(fisher)) > -1e-8


def test_qfim_exact_size_cap():
    circ = build_strongly_entangling(8, 3)  # 72 parameters
    assert circ.num_params > EXACT_QFIM_MAX_PARAMS
    with pytest.raises(ValueError):
        qfim_exact(circ, np.zeros(circ.num_params))


def test_block_diagonal_blocks_and_zeros():
    rng = np.random.default_rng(24)
    circ = build_strongly_entangling(3, 3)
    theta = rng.uniform(0, 2 * math.pi, circ.num_params)
    blocked = qfim_block_diagonal(circ, theta)
    assert blocked.fidelity == "block_diagonal"
    mask = np.zeros_like(blocked.entries, dtype=bool)
    for tag in circ.layers:
        mask[tag.param_start:tag.param_stop, tag.param_start:tag.param_stop] = True
    assert np.all(blocked.entries[~mask] == 0.0)
    # each block is the exact QFIM of the circuit truncated after its layer
    for k, tag in enumerate(circ.layers):
        trunc = Circuit(circ.num_qubits, circ.gates[:tag.gate_stop],
                        tag.param_stop)
        sub = qfim_exact(trunc, theta[:tag.param_stop]).entries
        sl = slice(tag.param_start, tag.param_stop)
        assert np.allclose(blocked.entries[sl, sl], sub[sl, sl], atol=1e-12)


def test_block_diagonal_single_layer_equals_exact():
    rng = np.random.default_rng(25)
    circ = build_hea(1, 3)
    theta = rng.uniform(0, 2 * math.pi, circ.num_params)
    assert np.allclose(qfim_block_diagonal(circ, theta).entries,
                       qfim_exact(circ, theta).entries, atol=1e-12)


def test_block_diagonal_requires_tags():
    plain = Circuit(1, (Gate(RY, target=0, param_slots=(0,)),), 1)
    with pytest.raises(ValueError):
        qfim_block_diagonal(plain, [0.3])


def test_empirical_is_gradient_outer_product():
    grad = np.array([0.5, -1.0, 2.0])
    fisher = qfim_empirical(grad)
    assert fisher.fidelity == "empirical"
    assert np.allclose(fisher.entries, np.outer(grad, grad))
    assert np.linalg.matrix_rank(fisher.entries) == 1


def test_fidelity_ladder_dispatch():
    rng = np.random.default_rng(26)
    small = build_hea(2, 3)  # 12 params
    assert qfim(small, rng.uniform(0, 1, small.num_params)).fidelity == "exact"
    big = build_strongly_entangling(8, 3)  # 72 params, tagged
    assert qfim(big, rng.uniform(0, 1, big.num_params)).fidelity == "block_diagonal"
    untagged = Circuit(big.num_qubits, big.gates, big.num_params)
    grad_fn = lambda theta: np.ones(big.num_params)
    assert qfim(untagged, np.zeros(big.num_params),
                gradient_fn=grad_fn).fidelity == "empirical"
    with pytest.raises(ValueError):
        qfim(untagged, np.zeros(big.num_params))


def test_stabilize():
    circ = build_hea(1, 2)
    fisher = qfim_exact(circ, np.full(circ.num_params, 0.3))
    bumped = stabilize(fisher, 1e-6)
    assert np.allclose(bumped.entries, fisher.entries + 1e-6 * np.eye(4))
    assert bumped.fidelity == fisher.fidelity
    with pytest.raises(ValueError):
        stabilize(fisher, 0.0)
    with pytest.raises(ValueError):
        stabilize(fisher, -1e-6)


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(27)
    for n in (1, 2, 3, 5, 8, 20, 40):
        mat = rng.standard_normal((n, n))
        mat = (mat + mat.T) / 2
        values, vectors = jacobi_eigendecomposition(mat)
        reference = np.sort(np.linalg.eigvalsh(mat))[::-1]
        assert np.max(np.abs(values - reference)) < 1e-9
        assert np.max(np.abs(vectors.T @ vectors - np.eye(n))) < 1e-9
        recon = vectors @ np.diag(values) @ vectors.T
        assert np.linalg.norm(recon - mat) <= 1e-8 * max(np.linalg.norm(mat), 1.0)


def test_jacobi_degenerate_and_trivial():
    values, vectors = jacobi_eigendecomposition(2.5 * np.eye(4))
    assert np.allclose(values, 2.5)
    assert np.allclose(vectors.T @ vectors, np.eye(4))
    values, _ = jacobi_eigendecomposition(np.zeros((3, 3)))
    assert np.array_equal(values, np.zeros(3))
    values, _ = jacobi_eigendecomposition(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(values, [3.0, 2.0, -1.0])


def test_jacobi_rejects_bad_input():
    with pytest.raises(ValueError):
        jacobi_eigendecomposition(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        jacobi_eigendecomposition(np.zeros((2, 3)))


def test_hermitian_eigenvalues_descending():
    rng = np.random.default_rng(28)
    mat = rng.standard_normal((10, 10))
    mat = (mat + mat.T) / 2
    values = hermitian_eigenvalues(mat)
    assert np.all(np.diff(values) <= 1e-12)
    assert np.allclose(values, np.sort(np.linalg.eigvalsh(mat))[::-1], atol=1e-9)
