"""Brute-force dense reference for small registers.

Builds explicit 2^Q x 2^Q matrices by applying each term's operator product
to every basis family, one operator at a time, and checks energies by direct
Rayleigh quotients.  Nothing here touches the measurement compilation, the
rotation circuits, or the estimator's per-outcome weights, so agreement with
the estimator validates that whole path.

Sign convention: annihilation operators apply in ascending register order and
creations in descending order (the canonical product applied right to left),
each with parity (-1)**(number of occupied modes preceding it), where
"preceding" ranks the term's affected modes ahead of its unaffected modes.
Ranking affected modes first makes the matrix of each term the plain tensor
transition on its affected qubits times the global block-reorder sign -- the
same object the measurement expansion reconstructs -- and keeps the worked
dimer matrix elements (singlet off-diagonal 2t) and the estimator consistent.
"""

from __future__ import annotations

import numpy as np

from .ansatz import AnsatzSpec, is_excluded
from .fock import family_of, index_of
from .hamiltonian import Hamiltonian, InteractionTerm

__all__ = [
    "dense_term",
    "dense_hamiltonian",
    "exact_ansatz_energy",
    "ground_state_energy",
]

_MAX_DENSE_QUBITS = 14


def dense_term(indexing, term: InteractionTerm) -> np.ndarray:
    """Dense matrix of one term by sequential operator application."""
    q = indexing.size
    if len(term.create) != q:
        raise ValueError("term register size does not match indexing")
    affected = [p for p in range(q) if term.create[p] != term.annihilate[p]]
    unaffected = [p for p in range(q) if term.create[p] == term.annihilate[p]]
    rank = {p: i for i, p in enumerate(affected + unaffected)}
    ann = [p for p, b in enumerate(term.annihilate) if b]           # ascending
    cre = [p for p, b in enumerate(term.create) if b][::-1]         # descending

    dim = 1 << q
    mat = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = list(family_of(col, q))
        sign = 1
        ok = True
        for p in ann:
            if not bits[p]:
                ok = False
                break
            if sum(b for r, b in enumerate(bits) if rank[r] < rank[p]) % 2:
                sign = -sign
            bits[p] = 0
        if not ok:
            continue
        for p in cre:
            if bits[p]:
                ok = False
                break
            if sum(b for r, b in enumerate(bits) if rank[r] < rank[p]) % 2:
                sign = -sign
            bits[p] = 1
        if not ok:
            continue
        mat[index_of(bits), col] += sign * term.coeff
    return mat


def dense_hamiltonian(h: Hamiltonian) -> np.ndarray:
    if h.indexing.size > _MAX_DENSE_QUBITS:
        raise ValueError(f"dense construction capped at {_MAX_DENSE_QUBITS} modes")
    dim = 1 << h.indexing.size
    mat = np.zeros((dim, dim), dtype=complex)
    for term in h.terms:
        mat += dense_term(h.indexing, term)
    return mat


def _ansatz_state(spec: AnsatzSpec, theta, psi0: np.ndarray, q: int) -> np.ndarray:
    phi = np.zeros_like(psi0, dtype=complex)
    for idx in range(psi0.size):
        w = spec.evaluate(theta, family_of(idx, q))
        if is_excluded(w):
            continue
        phi[idx] = np.exp(1j * w) * psi0[idx]
    return phi


def exact_ansatz_energy(h: Hamiltonian, spec: AnsatzSpec, theta, psi0) -> float:
    """Rayleigh quotient of the phased-and-reweighted state, zeroing excluded
    families; the reference the estimator must reproduce in EXACT mode."""
    psi0 = np.asarray(psi0, dtype=complex)
    q = h.indexing.size
    if psi0.shape != (1 << q,):
        raise ValueError("initial statevector length does not match the register")
    phi = _ansatz_state(spec, theta, psi0, q)
    norm_sq = float(np.vdot(phi, phi).real)
    if norm_sq == 0.0:
        raise ValueError("ansatz excludes every populated family (zero norm)")
    mat = dense_hamiltonian(h)
    return float(np.vdot(phi, mat @ phi).real / norm_sq)


def ground_state_energy(h: Hamiltonian) -> float:
    """Smallest eigenvalue over the full dense matrix; hermitian input only."""
    mat = dense_hamiltonian(h)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-9:
        raise ValueError("ground-state energy needs a hermitian Hamiltonian")
    return float(np.linalg.eigvalsh(mat)[0])
