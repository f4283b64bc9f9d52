"""Shared fixtures and reference helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from cvqe.ansatz import AnsatzSpec, EXCLUDED, bloch_singlet_hubbard
from cvqe.circuits import CircuitSpec, GateOp
from cvqe.cli import execute_plan
from cvqe.estimator import CascadeEstimator, build_plan
from cvqe.fock import SystemIndexing, family_of
from cvqe.hamiltonian import (
    Hamiltonian,
    compile_hamiltonian,
    hubbard_dimer,
    term_from_operators,
)

T_HOP = -0.158
U_INT = 1.0

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


# ---------------------------------------------------------------------------
# closed-form references for the half-filled dimer surface
# ---------------------------------------------------------------------------

def dimer_norm(lat: float) -> float:
    return 1.0 / (4.0 * np.cos(lat))


def dimer_overlap(lat: float, lon: float, t: float = T_HOP, u: float = U_INT) -> float:
    return (t / 2.0) * np.cos(lon) + (u / 8.0) / np.tan(np.pi / 4 + lat / 2)


def dimer_energy(lat: float, lon: float, t: float = T_HOP, u: float = U_INT) -> float:
    return 2.0 * t * np.cos(lat) * np.cos(lon) + (u / 2.0) * (1.0 - np.sin(lat))


def dimer_energy_grad(lat: float, lon: float, t: float = T_HOP, u: float = U_INT) -> np.ndarray:
    return np.array([
        -2.0 * t * np.sin(lat) * np.cos(lon) - (u / 2.0) * np.cos(lat),
        -2.0 * t * np.cos(lat) * np.sin(lon),
    ])


DIMER_LAT_STAR_DEG = 57.7071
DIMER_ENERGY_STAR = 0.5 * U_INT - np.sqrt(U_INT ** 2 / 4 + 4 * T_HOP ** 2)


# ---------------------------------------------------------------------------
# random problem generators (seeded by the caller)
# ---------------------------------------------------------------------------

def random_hermitian_hamiltonian(rng: np.random.Generator, q: int,
                                 kinds=("number", "density", "hop", "assisted", "pair"),
                                 n_terms: int | None = None) -> Hamiltonian:
    """Random hermitian mix of one- and two-body terms: every generated term
    is paired with its exact adjoint."""
    ix = SystemIndexing(tuple(f"m{i}" for i in range(q)))
    labels = ix.labels
    usable = [k for k in kinds
              if not (k in ("density", "hop", "pair") and q < 2)
              and not (k == "assisted" and q < 3)]
    terms = []
    n = n_terms if n_terms is not None else int(rng.integers(max(2, q - 1), 2 * q + 1))
    for _ in range(n):
        kind = usable[rng.integers(len(usable))]
        if kind == "number":
            a = labels[rng.integers(q)]
            create, annihilate = [a], [a]
        elif kind == "density":
            a, b = rng.choice(q, size=2, replace=False)
            create = [labels[a], labels[b]]
            annihilate = [labels[b], labels[a]]
        elif kind == "hop":
            a, b = rng.choice(q, size=2, replace=False)
            create, annihilate = [labels[a]], [labels[b]]
        elif kind == "assisted":
            a, b, w = rng.choice(q, size=3, replace=False)
            create = [labels[a], labels[w]]
            annihilate = [labels[w], labels[b]]
        else:  # pair transfer
            a, b = rng.choice(q, size=2, replace=False)
            c, d = rng.choice(q, size=2, replace=False)
            create = [labels[a], labels[b]]
            annihilate = [labels[c], labels[d]]
        coeff = complex(rng.normal(), rng.normal())
        terms.append(term_from_operators(ix, coeff, create, annihilate))
        terms.append(term_from_operators(ix, np.conj(coeff),
                                         annihilate[::-1], create[::-1]))
    return Hamiltonian(ix, tuple(terms))


def random_initial_circuit(rng: np.random.Generator, q: int,
                           depth: int | None = None) -> CircuitSpec:
    """Generic complex state: a Hadamard layer then random gates."""
    gates = [GateOp("H", p) for p in range(q)]
    kinds = ["X", "Z", "H", "SX", "RX90", "RY-90", "CX"]
    for _ in range(depth if depth is not None else 3 * q):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "CX" and q >= 2:
            c, t = rng.choice(q, size=2, replace=False)
            gates.append(GateOp("CX", int(t), int(c)))
        elif kind != "CX":
            gates.append(GateOp(kind, int(rng.integers(q))))
    return CircuitSpec(q, tuple(gates))


def tabular_ansatz(rng: np.random.Generator, q: int,
                   exclude_fraction: float = 0.15) -> AnsatzSpec:
    """Arbitrary complex phase exponents frozen per family, some excluded;
    exercises real and imaginary exponent parts together."""
    dim = 1 << q
    table = {}
    for idx in range(dim):
        if idx != 0 and rng.random() < exclude_fraction:
            table[family_of(idx, q)] = EXCLUDED
        else:
            table[family_of(idx, q)] = complex(rng.normal(), 0.5 * rng.normal())

    def evaluate(theta, family):
        return table[tuple(family)]

    def gradient(theta, family):
        return np.zeros(1, dtype=complex)

    return AnsatzSpec(name="tabular", dim=1, evaluate=evaluate,
                      gradient=gradient, param_names=("unused",), domain=None)


def embed_ops(q: int, ops: dict[int, np.ndarray]) -> np.ndarray:
    """Kron product placing 2x2 operators at register positions."""
    mat = np.eye(1, dtype=complex)
    for p in range(q):
        mat = np.kron(mat, ops.get(p, I2))
    return mat


# ---------------------------------------------------------------------------
# session fixtures: the worked dimer problem
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def dimer():
    return hubbard_dimer(T_HOP, U_INT)


@pytest.fixture(scope="session")
def dimer_compiled(dimer):
    return compile_hamiltonian(dimer)


@pytest.fixture(scope="session")
def dimer_plan(dimer_compiled):
    return build_plan(dimer_compiled)


@pytest.fixture(scope="session")
def uniform_circuit():
    return CircuitSpec(4, tuple(GateOp("H", p) for p in range(4)))


@pytest.fixture(scope="session")
def dimer_exact_archive(dimer_compiled, dimer_plan, uniform_circuit):
    return execute_plan(dimer_compiled, dimer_plan, uniform_circuit, "exact", 0, 0)


@pytest.fixture(scope="session")
def bloch_spec():
    return bloch_singlet_hubbard()


@pytest.fixture(scope="session")
def dimer_estimator(dimer_compiled, dimer_plan, dimer_exact_archive, bloch_spec):
    return CascadeEstimator(dimer_compiled, dimer_plan, dimer_exact_archive, bloch_spec)
