"""Second-quantized interaction terms and their measurement compilation.

A term is stored canonically as a coefficient together with a creation family
n+ and an annihilation family n-: the operator product has all creations
first, ordered by the mode register, followed by the annihilations in
reversed register order (the adjoint of the creation block).  Parsing an
operator product written in any order folds the anticommutation parity of the
reorder into the coefficient and rejects repeated modes, whose product is
identically zero.

Compilation splits the register per term into affected modes (occupation
changes: the term hops or pairs there) and unaffected modes (at most a number
constraint).  The affected block, reordered to the front, carries a global
permutation sign; on the affected subspace the remaining operator is a pure
transition |dot_n+><dot_n-| which expands over products of Pauli x/y axes,
one axis choice per affected mode.  ``outcome_coefficient`` gives the exact
weight a measured bit string contributes for one term and one axis choice;
these weights are what the estimator sums.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from dataclasses import dataclass
from itertools import product

from .fock import (
    AffectedPartition,
    SystemIndexing,
    family_to_string,
    partition_from_affected,
    split_family,
)

__all__ = [
    "InteractionTerm",
    "Hamiltonian",
    "CompiledTerm",
    "CompiledHamiltonian",
    "term_from_operators",
    "compile_term",
    "compile_hamiltonian",
    "permutation_sign",
    "outcome_coefficient",
    "pauli_expansion_coefficient",
    "validate_hermitian",
    "hubbard_dimer",
    "save_hamiltonian",
    "load_hamiltonian",
]

MEASUREMENT_AXES = ("x", "y")


@dataclass(frozen=True)
class InteractionTerm:
    """Canonical term: coeff * (creations in register order) * (adjoint block)."""

    coeff: complex
    create: tuple[int, ...]
    annihilate: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "create", tuple(int(b) for b in self.create))
        object.__setattr__(self, "annihilate", tuple(int(b) for b in self.annihilate))
        if len(self.create) != len(self.annihilate):
            raise ValueError("creation and annihilation families differ in length")
        for fam in (self.create, self.annihilate):
            if any(b not in (0, 1) for b in fam):
                raise ValueError("families must be 0/1 tuples")


@dataclass(frozen=True)
class Hamiltonian:
    indexing: SystemIndexing
    terms: tuple[InteractionTerm, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if len(t.create) != self.indexing.size:
                raise ValueError("term register size does not match indexing")


def _inversions(seq) -> int:
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return inv


def term_from_operators(indexing: SystemIndexing, coeff, create_labels, annihilate_labels) -> InteractionTerm:
    """Canonicalize an operator product given in left-to-right written order.

    ``create_labels`` are the creation operators as written, ``annihilate_labels``
    the annihilation operators as written.  Reordering to canonical form flips
    the coefficient sign once per operator transposition.
    """
    cpos = indexing.positions(create_labels)
    apos = indexing.positions(annihilate_labels)
    if len(set(cpos)) != len(cpos) or len(set(apos)) != len(apos):
        raise ValueError("repeated mode in an operator product (identically zero)")
    sign = 1
    # canonical creation order is ascending; each inversion is one transposition
    sign *= -1 if _inversions(list(cpos)) % 2 else 1
    # canonical annihilation order is descending (adjoint of the creation block)
    sign *= -1 if _inversions([-p for p in apos]) % 2 else 1
    q = indexing.size
    create = tuple(1 if p in set(cpos) else 0 for p in range(q))
    annihilate = tuple(1 if p in set(apos) else 0 for p in range(q))
    return InteractionTerm(sign * complex(coeff), create, annihilate)


@dataclass(frozen=True)
class CompiledTerm:
    """A term with its affected split, reorder sign, and measurement data."""

    term: InteractionTerm
    partition: AffectedPartition
    sign: int
    dot_n_plus: tuple[int, ...]
    dot_n_minus: tuple[int, ...]
    vec_n_plus: tuple[int, ...]
    measurement_families: tuple[tuple[str, ...], ...]

    @property
    def affected_count(self) -> int:
        return self.partition.affected_count


@dataclass(frozen=True)
class CompiledHamiltonian:
    indexing: SystemIndexing
    terms: tuple[CompiledTerm, ...]
    hermitian: bool


def permutation_sign(term: InteractionTerm, partition: AffectedPartition) -> int:
    """Parity of reordering the operator product so affected modes come first.

    Creation and annihilation blocks reorder independently; reversing the
    annihilation block on both sides leaves its parity unchanged, so both
    blocks count inversions against the affected-first mode ranking.
    """
    order = partition.affected_positions + partition.unaffected_positions
    rank = {p: i for i, p in enumerate(order)}
    sign = 1
    for fam in (term.create, term.annihilate):
        ranks = [rank[p] for p, b in enumerate(fam) if b]
        sign *= -1 if _inversions(ranks) % 2 else 1
    return sign


def compile_term(indexing: SystemIndexing, term: InteractionTerm) -> CompiledTerm:
    """Split off the affected modes and precompute everything m-independent."""
    if len(term.create) != indexing.size:
        raise ValueError("term register size does not match indexing")
    affected = [indexing.labels[p] for p in range(indexing.size)
                if term.create[p] != term.annihilate[p]]
    partition = partition_from_affected(indexing, affected)
    dot_plus, vec_plus = split_family(term.create, partition)
    dot_minus, vec_minus = split_family(term.annihilate, partition)
    assert vec_plus == vec_minus  # unaffected modes agree by construction
    families = tuple(product(MEASUREMENT_AXES, repeat=partition.affected_count))
    return CompiledTerm(
        term=term,
        partition=partition,
        sign=permutation_sign(term, partition),
        dot_n_plus=dot_plus,
        dot_n_minus=dot_minus,
        vec_n_plus=vec_plus,
        measurement_families=families,
    )


def compile_hamiltonian(h: Hamiltonian) -> CompiledHamiltonian:
    hermitian = validate_hermitian(h)
    if not hermitian:
        warnings.warn("Hamiltonian is not hermitian: energies may be complex",
                      stacklevel=2)
    compiled = tuple(compile_term(h.indexing, t) for t in h.terms)
    return CompiledHamiltonian(h.indexing, compiled, hermitian)


def _check_axes(ct: CompiledTerm, m) -> tuple[str, ...]:
    m = tuple(m)
    if len(m) != ct.affected_count or any(ax not in MEASUREMENT_AXES for ax in m):
        raise ValueError(f"invalid measurement axes {m!r} for this term")
    return m


def pauli_expansion_coefficient(ct: CompiledTerm, m) -> complex:
    """Expansion weight of the affected-subspace transition over one axis choice.

    Per affected mode: axis x contributes 1; axis y contributes +i when the
    mode is annihilated there (n+ = 0) and -i when it is created (n+ = 1).
    """
    m = _check_axes(ct, m)
    value = 1 + 0j
    for k, ax in enumerate(m):
        if ax == "y":
            value *= -1j if ct.dot_n_plus[k] else 1j
    return value


def outcome_coefficient(ct: CompiledTerm, m, outcome) -> complex:
    """Weight of one measured bit string for one term and one axis choice.

    Zero when the outcome violates the number constraint on unaffected modes;
    otherwise sign * coeff / 2**affected_count, times (-1) per set affected
    outcome bit, times the axis expansion weight.
    """
    m = _check_axes(ct, m)
    outcome = tuple(outcome)
    if len(outcome) != ct.partition.indexing.size:
        raise ValueError("outcome length does not match register size")
    for want, pos in zip(ct.vec_n_plus, ct.partition.unaffected_positions):
        if want and not outcome[pos]:
            return 0j
    value = ct.sign * ct.term.coeff / (2 ** ct.affected_count)
    for pos in ct.partition.affected_positions:
        if outcome[pos]:
            value = -value
    return value * pauli_expansion_coefficient(ct, m)


def validate_hermitian(h: Hamiltonian, decimals: int = 9) -> bool:
    """Advisory check: every term needs a conjugate partner with swapped
    families and conjugated coefficient, with matching multiplicity."""
    fwd = Counter(
        (round(t.coeff.real, decimals), round(t.coeff.imag, decimals), t.create, t.annihilate)
        for t in h.terms
    )
    rev = Counter(
        (round(t.coeff.real, decimals), round(-t.coeff.imag, decimals), t.annihilate, t.create)
        for t in h.terms
    )
    return fwd == rev


def hubbard_dimer(t: float, u: float,
                  labels: tuple[str, str, str, str] = ("0u", "0d", "1u", "1d")) -> Hamiltonian:
    """Two-site Hubbard model at interleaved site/spin ordering.

    Four hopping terms with amplitude ``t`` and one on-site repulsion ``u``
    per site, written as number-pair products.
    """
    ix = SystemIndexing(labels)
    s0u, s0d, s1u, s1d = labels
    terms = [
        term_from_operators(ix, t, [s0u], [s1u]),
        term_from_operators(ix, t, [s1u], [s0u]),
        term_from_operators(ix, t, [s0d], [s1d]),
        term_from_operators(ix, t, [s1d], [s0d]),
        term_from_operators(ix, u, [s0u, s0d], [s0d, s0u]),
        term_from_operators(ix, u, [s1u, s1d], [s1d, s1u]),
    ]
    return Hamiltonian(ix, tuple(terms))


# ---------------------------------------------------------------------------
# file format: line-oriented JSON, one header record then one record per term
# ---------------------------------------------------------------------------

def save_hamiltonian(h: Hamiltonian, path) -> None:
    """Write the header record and one canonical-order record per term."""
    ix = h.indexing
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"modes": list(ix.labels)}) + "\n")
        for t in h.terms:
            create = [ix.labels[p] for p, b in enumerate(t.create) if b]
            annihilate = [ix.labels[p] for p, b in enumerate(t.annihilate) if b][::-1]
            rec = {
                "coeff": [t.coeff.real, t.coeff.imag],
                "create": create,
                "annihilate": annihilate,
            }
            fh.write(json.dumps(rec) + "\n")


def load_hamiltonian(path) -> Hamiltonian:
    """Read the line-oriented format; file order of terms is preserved."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"empty Hamiltonian file: {path}")
    header = json.loads(lines[0])
    if not isinstance(header, dict) or "modes" not in header:
        raise ValueError("first record must list the mode register under 'modes'")
    ix = SystemIndexing(tuple(header["modes"]))
    terms = []
    for ln in lines[1:]:
        rec = json.loads(ln)
        try:
            re_c, im_c = rec["coeff"]
            coeff = complex(float(re_c), float(im_c))
            terms.append(term_from_operators(ix, coeff, rec["create"], rec["annihilate"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad term record {ln!r}: {exc}") from exc
    return Hamiltonian(ix, tuple(terms))
