"""Parameter-shift differentiation and quantum Fisher information.

Every parameterized gate in the simulator is a Pauli rotation, so the
two-point shift rule with shift pi/2 is exact both for expectation-value
costs and, with the matching 1/(4 sin(pi/4)) scaling, for statevector
derivatives. The QFIM comes in three fidelities: exact (all cross terms),
block-diagonal (one block per tagged ansatz layer), and the rank-one
empirical surrogate built from a task gradient.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .simulator import Circuit, apply_circuit, run_gates

SHIFT = math.pi / 2
# ψ(θ+s) − ψ(θ−s) = −4i sin(s/2) G U ψ for a rotation generator G, so the
# statewise central difference needs 1/(4 sin(s/2)), not the 1/2 used for
# expectation values.
_STATE_SHIFT_SCALE = 1.0 / (4.0 * math.sin(SHIFT / 2.0))

EXACT_QFIM_MAX_PARAMS = 64

FIDELITY_EXACT = "exact"
FIDELITY_BLOCK = "block_diagonal"
FIDELITY_EMPIRICAL = "empirical"


@dataclass
class Qfim:
    entries: np.ndarray
    fidelity: str


def _shift_rows(theta: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Rows [theta + (pi/2) e_mu ; theta - (pi/2) e_mu] for mu in indices."""
    m = len(indices)
    rows = np.repeat(theta[None, :], 2 * m, axis=0)
    rows[np.arange(m), indices] += SHIFT
    rows[m + np.arange(m), indices] -= SHIFT
    return rows


def gradient(circuit: Circuit, theta, cost_fn) -> np.ndarray:
    """dC/dtheta by the parameter-shift rule.

    cost_fn must accept a (B, p) batch of parameter rows and return (B,)
    values; it is evaluated once on all 2p shifted rows.
    """
    theta = np.asarray(theta, dtype=float)
    p = circuit.num_params
    if theta.shape != (p,):
        raise ValueError(f"theta must have shape ({p},)")
    if p == 0:
        return np.zeros(0)
    values = np.asarray(cost_fn(_shift_rows(theta, np.arange(p))), dtype=float)
    grad = (values[:p] - values[p:]) / 2.0
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("gradient has non-finite entries")
    return grad


def _qfim_from_states(dpsi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    overlap = dpsi.conj() @ dpsi.T
    berry = dpsi.conj() @ psi
    fisher = 4.0 * (overlap - np.outer(berry, berry.conj())).real
    return (fisher + fisher.T) / 2.0


def qfim_exact(circuit: Circuit, theta, features=None) -> Qfim:
    """Full QFIM  4 Re(<d_mu psi|d_nu psi> - <d_mu psi|psi><psi|d_nu psi>).

    State derivatives come from pi/2-shifted statevectors. Only practical up
    to EXACT_QFIM_MAX_PARAMS parameters; above that pick another fidelity.
    """
    theta = np.asarray(theta, dtype=float)
    p = circuit.num_params
    if p > EXACT_QFIM_MAX_PARAMS:
        raise ValueError(
            f"{p} parameters exceeds the exact-QFIM threshold "
            f"{EXACT_QFIM_MAX_PARAMS}; use block-diagonal or empirical")
    psi = apply_circuit(circuit, theta, features)
    if p == 0:
        return Qfim(np.zeros((0, 0)), FIDELITY_EXACT)
    states = apply_circuit(circuit, _shift_rows(theta, np.arange(p)), features)
    dpsi = (states[:p] - states[p:]) * _STATE_SHIFT_SCALE
    return Qfim(_qfim_from_states(dpsi, psi), FIDELITY_EXACT)


def qfim_block_diagonal(circuit: Circuit, theta, features=None) -> Qfim:
    """Layer-blocked QFIM: each tagged layer's block is the exact QFIM of the
    circuit truncated after that layer; cross-layer entries are zero."""
    theta = np.asarray(theta, dtype=float)
    p = circuit.num_params
    if theta.shape != (p,):
        raise ValueError(f"theta must have shape ({p},)")
    covered = [mu for tag in circuit.layers
               for mu in range(tag.param_start, tag.param_stop)]
    if sorted(covered) != list(range(p)):
        raise ValueError("circuit has no complete layer tags; "
                         "block-diagonal QFIM needs a tagged ansatz")
    feats = None
    entries = np.zeros((p, p))
    for tag in circuit.layers:
        gates = circuit.gates[:tag.gate_stop]
        idx = np.arange(tag.param_start, tag.param_stop)
        rows = np.vstack([_shift_rows(theta, idx), theta[None, :]])
        if features is not None:
            feats = np.broadcast_to(np.asarray(features, dtype=float),
                                    (rows.shape[0], len(features)))
        states = run_gates(gates, circuit.num_qubits, rows, feats)
        m = len(idx)
        dpsi = (states[:m] - states[m:2 * m]) * _STATE_SHIFT_SCALE
        entries[np.ix_(idx, idx)] = _qfim_from_states(dpsi, states[-1])
    return Qfim(entries, FIDELITY_BLOCK)


def qfim_empirical(grad: np.ndarray) -> Qfim:
    """Rank-one outer-product surrogate grad x grad."""
    g = np.asarray(grad, dtype=float)
    return Qfim(np.outer(g, g), FIDELITY_EMPIRICAL)


def qfim(circuit: Circuit, theta, features=None, gradient_fn=None) -> Qfim:
    """Fidelity ladder: exact when p <= 64, else block-diagonal when the
    circuit carries layer tags, else the empirical surrogate."""
    if circuit.num_params <= EXACT_QFIM_MAX_PARAMS:
        return qfim_exact(circuit, theta, features)
    if circuit.layers:
        return qfim_block_diagonal(circuit, theta, features)
    if gradient_fn is None:
        raise ValueError("untagged circuit above the exact threshold needs a "
                         "task gradient for the empirical QFIM")
    return qfim_empirical(gradient_fn(np.asarray(theta, dtype=float)))


def stabilize(fisher: Qfim, eps: float) -> Qfim:
    """F + eps*I, the jitter that keeps scalar reductions bounded."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = fisher.entries.shape[0]
    return Qfim(fisher.entries + eps * np.eye(p), fisher.fidelity)


def jacobi_eigendecomposition(matrix, tol: float = 1e-12,
                              max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns (eigenvalues descending, eigenvector columns in the same order).
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.size and np.max(np.abs(a - a.T)) > 1e-9:
        raise ValueError("matrix is not symmetric within 1e-9")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    vecs = np.eye(n)
    if n <= 1:
        return a.reshape(-1).copy(), vecs
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), vecs
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        skip = tol * scale / (n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau == 0.0:
                    t = 1.0
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                v_p = vecs[:, p].copy()
                v_q = vecs[:, q].copy()
                vecs[:, p] = c * v_p - s * v_q
                vecs[:, q] = s * v_p + c * v_q
    else:
        raise ArithmeticError("Jacobi sweeps did not converge")
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vecs[:, order]


def hermitian_eigenvalues(matrix) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix, sorted descending."""
    return jacobi_eigendecomposition(matrix)[0]
