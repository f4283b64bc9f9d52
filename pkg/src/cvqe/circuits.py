"""Statevector circuits, measurement sampling, and sampled-outcome records.

This is the only module that "runs" quantum circuits.  Every call that turns
a statevector into measurement data bumps a module-level execution counter,
which downstream tests read to prove that parameter optimization never comes
back here: circuits run once, estimation replays the recorded outcomes.

Qubit p holds mode p of the register, and basis states pack big-endian like
occupation families, so a measured bit string is the family string.  Sampling
draws from the per-circuit stream ``default_rng((master_seed, crc32(key)))``
via inverse CDF on the cumulative pmf, which makes archives reproducible per
circuit and independent of execution order.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from math import log2

import numpy as np

from .fock import family_of, family_to_string, family_from_string

__all__ = [
    "GateOp",
    "CircuitSpec",
    "SampleSet",
    "ONE_QUBIT_GATES",
    "apply_gate",
    "prepare_initial_state",
    "rotation_gates",
    "rotation_circuit",
    "pmf",
    "sample",
    "exact_sampleset",
    "execution_count",
]

_SQRT2 = np.sqrt(2.0)

ONE_QUBIT_GATES: dict[str, np.ndarray] = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2,
    "SX": np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex) / 2,
    # quarter turns used for measurement-basis changes: (1 -+ i sigma_{x,y}) / sqrt(2)
    "RX90": np.array([[1, -1j], [-1j, 1]], dtype=complex) / _SQRT2,
    "RY-90": np.array([[1, 1], [-1, 1]], dtype=complex) / _SQRT2,
}

# measurement axis -> basis-change gate diagonalizing that Pauli axis
AXIS_GATES = {"x": "RY-90", "y": "RX90"}

GATE_ALIASES = {"RY90": "RY-90"}

_EXACT_FLOOR = 1e-15

_executions = 0


def execution_count() -> int:
    """Total number of circuit executions (sampled or exact) so far."""
    return _executions


def _record_execution() -> None:
    global _executions
    _executions += 1


@dataclass(frozen=True)
class GateOp:
    kind: str
    target: int
    control: int | None = None

    def __post_init__(self) -> None:
        kind = GATE_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind == "CX":
            if self.control is None or self.control == self.target:
                raise ValueError("CX needs a control distinct from the target")
        elif kind in ONE_QUBIT_GATES:
            if self.control is not None:
                raise ValueError(f"{kind} takes no control qubit")
        else:
            raise ValueError(f"unknown gate kind: {self.kind!r}")


def gateop_to_list(g: GateOp) -> list:
    return [g.kind, g.control, g.target] if g.kind == "CX" else [g.kind, g.target]


def gateop_from_list(item) -> GateOp:
    if not isinstance(item, (list, tuple)) or not 2 <= len(item) <= 3:
        raise ValueError(f"bad gate record: {item!r}")
    if len(item) == 3:
        return GateOp(str(item[0]), int(item[2]), int(item[1]))
    return GateOp(str(item[0]), int(item[1]))


@dataclass(frozen=True)
class CircuitSpec:
    qubits: int
    gates: tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.qubits <= 0:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            touched = (g.target,) if g.control is None else (g.target, g.control)
            if any(not 0 <= q < self.qubits for q in touched):
                raise ValueError(f"gate {g} addresses a qubit outside the register")


def _num_qubits(state: np.ndarray) -> int:
    n = int(round(log2(state.size)))
    if 2 ** n != state.size:
        raise ValueError("statevector length must be a power of two")
    return n


def apply_gate(state: np.ndarray, gate: GateOp) -> np.ndarray:
    """Apply one gate; qubit 0 is the most significant axis of the index."""
    n = _num_qubits(state)
    psi = np.asarray(state, dtype=complex).reshape((2,) * n)
    if gate.kind == "CX":
        psi = np.moveaxis(psi, (gate.control, gate.target), (0, 1)).copy()
        psi[1] = psi[1, ::-1]
        psi = np.moveaxis(psi, (0, 1), (gate.control, gate.target))
    else:
        u = ONE_QUBIT_GATES[gate.kind]
        psi = np.moveaxis(psi, gate.target, 0)
        psi = np.tensordot(u, psi, axes=((1,), (0,)))
        psi = np.moveaxis(psi, 0, gate.target)
    return np.ascontiguousarray(psi).reshape(-1)


def prepare_initial_state(spec: CircuitSpec) -> np.ndarray:
    """Run the circuit on |0...0>; the result must stay normalized."""
    state = np.zeros(2 ** spec.qubits, dtype=complex)
    state[0] = 1.0
    for g in spec.gates:
        state = apply_gate(state, g)
    norm = float(np.linalg.norm(state))
    if abs(norm - 1.0) > 1e-12:
        raise RuntimeError(f"statevector norm drifted to {norm!r}")
    return state


def rotation_gates(qubits: int, positions, axes) -> tuple[GateOp, ...]:
    """Basis-change gates for measuring the given Pauli axes at ``positions``."""
    positions = tuple(positions)
    axes = tuple(axes)
    if len(positions) != len(axes):
        raise ValueError("one axis is required per rotated qubit")
    return tuple(GateOp(AXIS_GATES[ax], pos) for pos, ax in zip(positions, axes))


def rotation_circuit(compiled_term, m) -> CircuitSpec:
    """Measurement circuit for one term and one axis choice: exactly one
    rotation per affected qubit, nothing on unaffected qubits."""
    part = compiled_term.partition
    m = tuple(m)
    if len(m) != part.affected_count or any(ax not in AXIS_GATES for ax in m):
        raise ValueError(f"invalid measurement axes {m!r} for this term")
    qubits = part.indexing.size
    return CircuitSpec(qubits, rotation_gates(qubits, part.affected_positions, m))


def pmf(state: np.ndarray) -> np.ndarray:
    p = np.abs(np.asarray(state, dtype=complex)) ** 2
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"statevector is not normalized (sum of pmf {total!r})")
    return p


@dataclass(frozen=True)
class SampleSet:
    """Measurement record of one circuit: outcomes with counts or exact weights.

    ``total_weight`` is the shot count in SHOT mode and 1.0 in EXACT mode;
    estimates divide by it, so both modes are consumed identically.
    """

    circuit_key: str
    mode: str
    total_weight: float
    entries: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self) -> None:
        if self.mode not in ("shot", "exact"):
            raise ValueError(f"unknown sample mode: {self.mode!r}")
        entries = tuple((tuple(bits), w) for bits, w in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        total = 0.0
        for bits, w in entries:
            if bits in seen:
                raise ValueError(f"duplicate outcome {family_to_string(bits)}")
            seen.add(bits)
            if w < 0:
                raise ValueError("outcome weights must be nonnegative")
            total += w
        tol = 1e-9 if self.mode == "shot" else max(1e-12, len(entries) * 1e-14)
        if entries and abs(total - self.total_weight) > tol * max(1.0, self.total_weight):
            raise ValueError("entry weights do not sum to total_weight")

    def to_dict(self) -> dict:
        return {
            "circuit_key": self.circuit_key,
            "mode": self.mode,
            "total_weight": self.total_weight,
            "entries": [[family_to_string(bits), w] for bits, w in self.entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampleSet":
        entries = tuple(
            (family_from_string(s), w) for s, w in data["entries"]
        )
        return cls(data["circuit_key"], data["mode"], float(data["total_weight"]), entries)


def _stream(seed: int, circuit_key: str) -> np.random.Generator:
    # one independent, order-insensitive stream per circuit
    return np.random.default_rng((int(seed), zlib.crc32(circuit_key.encode("utf-8"))))


def sample(state: np.ndarray, shots: int, seed: int, circuit_key: str = "circuit") -> SampleSet:
    """Draw ``shots`` outcomes by inverse CDF on the cumulative pmf."""
    if shots <= 0:
        raise ValueError("shot count must be positive")
    p = pmf(state)
    _record_execution()
    cdf = np.cumsum(p)
    cdf[-1] = 1.0  # guard against rounding at the top end
    draws = _stream(seed, circuit_key).random(int(shots))
    idx = np.searchsorted(cdf, draws, side="right")
    counts = np.bincount(idx, minlength=p.size)
    n = _num_qubits(state)
    entries = tuple(
        (family_of(i, n), int(c)) for i, c in enumerate(counts) if c > 0
    )
    return SampleSet(circuit_key, "shot", float(shots), entries)


def exact_sampleset(state: np.ndarray, circuit_key: str = "circuit") -> SampleSet:
    """Full outcome distribution with probabilities as weights (floor 1e-15)."""
    p = pmf(state)
    _record_execution()
    n = _num_qubits(state)
    entries = tuple(
        (family_of(i, n), float(pi)) for i, pi in enumerate(p) if pi > _EXACT_FLOOR
    )
    return SampleSet(circuit_key, "exact", 1.0, entries)
