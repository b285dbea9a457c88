"""Dense statevector simulation of parameterized circuits.

Convention: qubit 0 is the most significant bit of the amplitude index,
so |q0 q1 ... q_{n-1}> lives at index int("q0q1...", 2). Gates are applied
by strided amplitude updates; no 2^n x 2^n matrices are ever built. All
state-producing functions accept a batch of parameter vectors and then
return a batch of states, which keeps parameter-shift sweeps cheap.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

RX = "rx"
RY = "ry"
RZ = "rz"
ROT = "rot"  # 3-parameter ZYZ rotation: RZ(a) RY(b) RZ(c), slots (a, b, c)
CNOT = "cnot"
CZ = "cz"
FIXED_RY = "fixed_ry"  # constant RY(pi/4), no parameters

ROTATION_KINDS = (RX, RY, RZ)
GATE_KINDS = (RX, RY, RZ, ROT, CNOT, CZ, FIXED_RY)

FIXED_RY_ANGLE = math.pi / 4


@dataclass(frozen=True)
class Gate:
    """One circuit operation; angles come from theta slots or feature slots."""

    kind: str
    target: int
    control: int | None = None
    param_slots: tuple[int, ...] = ()
    feature_slot: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        n_angle = len(self.param_slots) + (self.feature_slot is not None)
        expected = {ROT: 3, CNOT: 0, CZ: 0, FIXED_RY: 0}.get(self.kind, 1)
        if n_angle != expected:
            raise ValueError(f"{self.kind} takes {expected} angle(s), got {n_angle}")
        if self.kind == ROT and self.feature_slot is not None:
            raise ValueError("rot gates cannot read feature slots")


@dataclass(frozen=True)
class Layer:
    """Index ranges identifying one ansatz layer (for block-diagonal QFIM)."""

    gate_stop: int  # gates[:gate_stop] is the circuit truncated after this layer
    param_start: int
    param_stop: int


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    num_params: int
    embedding_slots: tuple[int, ...] = ()
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("need at least one qubit")
        seen = []
        feat = []
        for g in self.gates:
            qubits = (g.target,) if g.control is None else (g.target, g.control)
            for q in qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit index {q} out of range")
            seen.extend(g.param_slots)
            if g.feature_slot is not None:
                feat.append(g.feature_slot)
        if sorted(seen) != list(range(self.num_params)):
            raise ValueError("theta slots must cover [0, num_params) exactly once")
        if sorted(feat) != list(self.embedding_slots):
            raise ValueError("feature slots do not match embedding_slots")

    @property
    def num_features(self) -> int:
        return len(self.embedding_slots)


@dataclass(frozen=True)
class Observable:
    """Hermitian operator as a real combination of Pauli words."""

    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("observable needs at least one term")
        q = len(self.terms[0][1])
        for coeff, word in self.terms:
            if not math.isfinite(coeff):
                raise ValueError("coefficients must be finite reals")
            if len(word) != q:
                raise ValueError("all Pauli words must have equal length")
            if any(ch not in "IXYZ" for ch in word):
                raise ValueError(f"illegal Pauli character in {word!r}")

    @property
    def num_qubits(self) -> int:
        return len(self.terms[0][1])


def zero_state(num_qubits: int, batch: int | None = None) -> np.ndarray:
    dim = 1 << num_qubits
    if batch is None:
        state = np.zeros(dim, dtype=complex)
        state[0] = 1.0
    else:
        state = np.zeros((batch, dim), dtype=complex)
        state[:, 0] = 1.0
    return state


def _rotate_single(state: np.ndarray, kind: str, qubit: int,
                   angle: np.ndarray) -> None:
    """In-place single-qubit rotation on a (B, 2^n) state batch."""
    batch = state.shape[0]
    s = state.reshape(batch, 1 << qubit, 2, -1)
    half = (np.asarray(angle, dtype=float) / 2.0).reshape(-1, 1, 1)
    if kind == RZ:
        s[:, :, 0, :] *= np.exp(-1j * half)
        s[:, :, 1, :] *= np.exp(1j * half)
        return
    c = np.cos(half)
    sn = np.sin(half)
    s0 = s[:, :, 0, :]
    s1 = s[:, :, 1, :]
    if kind == RY:
        new0 = c * s0 - sn * s1
        new1 = sn * s0 + c * s1
    elif kind == RX:
        new0 = c * s0 - 1j * sn * s1
        new1 = -1j * sn * s0 + c * s1
    else:
        raise ValueError(f"not a rotation kind: {kind}")
    s[:, :, 0, :] = new0
    s[:, :, 1, :] = new1


def _two_qubit_view(state: np.ndarray, q_lo: int, q_hi: int) -> np.ndarray:
    batch = state.shape[0]
    mid = 1 << (q_hi - q_lo - 1)
    return state.reshape(batch, 1 << q_lo, 2, mid, 2, -1)


def _apply_cnot(state: np.ndarray, control: int, target: int) -> None:
    s = _two_qubit_view(state, min(control, target), max(control, target))
    if control < target:
        tmp = s[:, :, 1, :, 0, :].copy()
        s[:, :, 1, :, 0, :] = s[:, :, 1, :, 1, :]
        s[:, :, 1, :, 1, :] = tmp
    else:
        tmp = s[:, :, 0, :, 1, :].copy()
        s[:, :, 0, :, 1, :] = s[:, :, 1, :, 1, :]
        s[:, :, 1, :, 1, :] = tmp


def _apply_cz(state: np.ndarray, q_a: int, q_b: int) -> None:
    s = _two_qubit_view(state, min(q_a, q_b), max(q_a, q_b))
    s[:, :, 1, :, 1, :] *= -1.0


def _angle_for(gate: Gate, slot_pos: int, thetas: np.ndarray,
               features: np.ndarray) -> np.ndarray:
    if gate.feature_slot is not None:
        return features[:, gate.feature_slot]
    return thetas[:, gate.param_slots[slot_pos]]


def run_gates(gates, num_qubits: int, thetas: np.ndarray,
              features: np.ndarray | None = None) -> np.ndarray:
    """Apply a gate sequence to |0...0> for a (B, p) batch of parameter rows.

    Internal workhorse: does not re-validate slot coverage, so it also works
    on truncated gate lists. Returns a (B, 2^n) batch.
    """
    batch = thetas.shape[0]
    if features is None:
        features = np.zeros((batch, 0))
    state = zero_state(num_qubits, batch)
    for gate in gates:
        if gate.kind in ROTATION_KINDS:
            _rotate_single(state, gate.kind, gate.target,
                           _angle_for(gate, 0, thetas, features))
        elif gate.kind == ROT:
            _rotate_single(state, RZ, gate.target,
                           thetas[:, gate.param_slots[0]])
            _rotate_single(state, RY, gate.target,
                           thetas[:, gate.param_slots[1]])
            _rotate_single(state, RZ, gate.target,
                           thetas[:, gate.param_slots[2]])
        elif gate.kind == FIXED_RY:
            _rotate_single(state, RY, gate.target,
                           np.full(batch, FIXED_RY_ANGLE))
        elif gate.kind == CNOT:
            _apply_cnot(state, gate.control, gate.target)
        elif gate.kind == CZ:
            _apply_cz(state, gate.control, gate.target)
        else:
            raise ValueError(f"cannot apply gate kind {gate.kind!r}")
    return state


def _as_batch(vec, length: int, name: str) -> tuple[np.ndarray, bool]:
    arr = np.atleast_2d(np.asarray(vec, dtype=float))
    if length == 0 and arr.size == 0:
        return np.zeros((1, 0)), np.asarray(vec).ndim > 1
    if arr.shape[1] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[1]}")
    return arr.reshape(-1, length), np.asarray(vec).ndim > 1


def apply_circuit(circuit: Circuit, theta, features=None) -> np.ndarray:
    """Run the circuit from |0...0>; returns amplitudes (or a batch of them).

    theta may be shape (p,) or (B, p). Circuits with embedding slots require
    a features argument of shape (f,) or (B, f).
    """
    thetas, batched_t = _as_batch(theta, circuit.num_params, "theta")
    if circuit.num_features:
        if features is None:
            raise ValueError("circuit has embedding slots; features required")
        feats, batched_f = _as_batch(features, circuit.num_features, "features")
    else:
        if features is not None and np.asarray(features).size:
            raise ValueError("circuit has no embedding slots")
        feats, batched_f = np.zeros((1, 0)), False
    batch = max(thetas.shape[0], feats.shape[0])
    if thetas.shape[0] not in (1, batch) or feats.shape[0] not in (1, batch):
        raise ValueError("theta and features batch sizes are incompatible")
    if thetas.shape[0] == 1 and batch > 1:
        thetas = np.broadcast_to(thetas, (batch, thetas.shape[1]))
    if feats.shape[0] == 1 and batch > 1:
        feats = np.broadcast_to(feats, (batch, feats.shape[1]))
    state = run_gates(circuit.gates, circuit.num_qubits, thetas, feats)
    norms = np.linalg.norm(state, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-10:
        raise FloatingPointError("statevector norm drifted beyond 1e-10")
    if not (batched_t or batched_f):
        return state[0]
    return state


def _pauli_phases_and_flip(word: str) -> tuple[np.ndarray, int]:
    q = len(word)
    flip = 0
    sign_mask = 0  # bits whose value flips the sign (Y and Z positions)
    n_y = 0
    for k, ch in enumerate(word):
        bit = 1 << (q - 1 - k)
        if ch == "X":
            flip |= bit
        elif ch == "Y":
            flip |= bit
            sign_mask |= bit
            n_y += 1
        elif ch == "Z":
            sign_mask |= bit
    idx = np.arange(1 << q, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(sign_mask)) & 1
    phases = (1j ** n_y) * np.where(parity, -1.0, 1.0)
    return phases, flip


def apply_pauli_word(state: np.ndarray, word: str) -> np.ndarray:
    """P|psi> for a Pauli word; acts on the last axis."""
    phases, flip = _pauli_phases_and_flip(word)
    if flip:
        src = np.arange(state.shape[-1]) ^ flip
        return phases[src] * state[..., src]
    return phases * state


def expectation(state: np.ndarray, obs: Observable):
    """<psi|O|psi> as a real number (batched states give a real vector)."""
    dim = state.shape[-1]
    if dim != 1 << obs.num_qubits:
        raise ValueError(
            f"state dimension {dim} does not match {obs.num_qubits}-qubit observable")
    total = np.zeros(state.shape[:-1], dtype=complex)
    for coeff, word in obs.terms:
        total += coeff * np.sum(np.conj(state) * apply_pauli_word(state, word),
                                axis=-1)
    if np.any(np.abs(total.imag) > 1e-10):
        raise FloatingPointError("expectation value has imaginary residue > 1e-10")
    real = total.real
    return float(real) if real.ndim == 0 else real


def build_strongly_entangling(layers: int, qubits: int) -> Circuit:
    """Strongly-entangling ansatz: per layer a 3-parameter ZYZ rotation on
    every qubit, then a ring of CNOTs with range 1 + (layer mod (qubits-1))."""
    if qubits < 2:
        raise ValueError("strongly-entangling ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("need at least one layer")
    gates: list[Gate] = []
    tags: list[Layer] = []
    slot = 0
    for layer in range(layers):
        p_start = slot
        for q in range(qubits):
            gates.append(Gate(ROT, target=q, param_slots=(slot, slot + 1, slot + 2)))
            slot += 3
        reach = 1 + (layer % (qubits - 1))
        for q in range(qubits):
            gates.append(Gate(CNOT, target=(q + reach) % qubits, control=q))
        tags.append(Layer(gate_stop=len(gates), param_start=p_start, param_stop=slot))
    return Circuit(qubits, tuple(gates), slot, layers=tuple(tags))


def build_two_design(layers: int, qubits: int, seed: int) -> Circuit:
    """Alternating-layer circuit that approaches a 2-design: a fixed RY(pi/4)
    wall, then per layer one randomly-axised rotation per qubit and a CZ
    ladder on neighbouring pairs. Axis choices come from the seed alone."""
    if qubits < 2:
        raise ValueError("two-design ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("need at least one layer")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    gates: list[Gate] = [Gate(FIXED_RY, target=q) for q in range(qubits)]
    tags: list[Layer] = []
    slot = 0
    for _ in range(layers):
        p_start = slot
        for q in range(qubits):
            kind = ROTATION_KINDS[rng.integers(3)]
            gates.append(Gate(kind, target=q, param_slots=(slot,)))
            slot += 1
        for q in range(qubits - 1):
            gates.append(Gate(CZ, target=q + 1, control=q))
        tags.append(Layer(gate_stop=len(gates), param_start=p_start, param_stop=slot))
    return Circuit(qubits, tuple(gates), slot, layers=tuple(tags))


def build_hea(layers: int, qubits: int) -> Circuit:
    """Hardware-efficient ansatz: per layer an RY column, an RZ column, and a
    CNOT chain i -> i+1."""
    if qubits < 2:
        raise ValueError("hardware-efficient ansatz needs at least 2 qubits")
    if layers < 1:
        raise ValueError("need at least one layer")
    gates: list[Gate] = []
    tags: list[Layer] = []
    slot = 0
    for _ in range(layers):
        p_start = slot
        for q in range(qubits):
            gates.append(Gate(RY, target=q, param_slots=(slot,)))
            slot += 1
        for q in range(qubits):
            gates.append(Gate(RZ, target=q, param_slots=(slot,)))
            slot += 1
        for q in range(qubits - 1):
            gates.append(Gate(CNOT, target=q + 1, control=q))
        tags.append(Layer(gate_stop=len(gates), param_start=p_start, param_stop=slot))
    return Circuit(qubits, tuple(gates), slot, layers=tuple(tags))


def embed_angles(circuit: Circuit, features) -> Circuit:
    """Prepend an RY data-embedding gate on qubit j for each feature j.

    `features` fixes only the number of slots (an int or a template vector);
    actual angles are supplied to apply_circuit at evaluation time.
    """
    count = features if isinstance(features, int) else len(np.atleast_1d(features))
    if count > circuit.num_qubits:
        raise ValueError("more features than qubits")
    if circuit.num_features:
        raise ValueError("circuit already has embedding slots")
    prelude = tuple(Gate(RY, target=j, feature_slot=j) for j in range(count))
    shifted = tuple(Layer(t.gate_stop + count, t.param_start, t.param_stop)
                    for t in circuit.layers)
    return Circuit(circuit.num_qubits, prelude + circuit.gates, circuit.num_params,
                   embedding_slots=tuple(range(count)), layers=shifted)
