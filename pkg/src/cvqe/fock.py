"""Occupation-number families and the affected/unaffected split of a mode register.

A register of Q fermionic modes is fixed by an ordered tuple of mode labels.
An occupation family is a length-Q tuple of {0, 1}; families pack big-endian
into integers, so the printed bit string reads the same as the ket label:
for Q = 4, (1, 0, 0, 1) <-> |1001> <-> index 9.

An interaction term touches only some modes (the affected sublist); the rest
are spectators whose occupations ride along unchanged.  ``split_family`` and
``merge_subfamilies`` move between the full register and the two ordered
sublists.  Both sublists preserve the relative order of the register, and the
two operations are exact inverses of each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

__all__ = [
    "SystemIndexing",
    "AffectedPartition",
    "index_of",
    "family_of",
    "family_to_string",
    "family_from_string",
    "split_family",
    "merge_subfamilies",
]

# characters that would collide with circuit-key and file-format delimiters
_FORBIDDEN_LABEL_CHARS = set(" \t\n,:+[]")


@dataclass(frozen=True)
class SystemIndexing:
    """Ordered register of mode labels; the order is total and fixed."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValueError("mode register must contain at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("mode labels must be unique")
        for lab in self.labels:
            if not lab or any(c in _FORBIDDEN_LABEL_CHARS for c in lab):
                raise ValueError(f"invalid mode label: {lab!r}")

    @property
    def size(self) -> int:
        """Number of modes Q."""
        return len(self.labels)

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def position(self, label: str) -> int:
        try:
            return self._positions[label]
        except KeyError:
            raise KeyError(f"unknown mode label: {label!r}") from None

    def positions(self, labels) -> tuple[int, ...]:
        return tuple(self.position(lab) for lab in labels)


def index_of(bits) -> int:
    """Pack an occupation family big-endian: first label is the most
    significant bit, so index = sum_p bits[p] * 2**(Q - 1 - p)."""
    idx = 0
    for b in bits:
        if b not in (0, 1):
            raise ValueError(f"occupations must be 0 or 1, got {b!r}")
        idx = (idx << 1) | b
    return idx


def family_of(index: int, size: int) -> tuple[int, ...]:
    """Inverse of :func:`index_of` for a register of ``size`` modes."""
    if size <= 0:
        raise ValueError("register size must be positive")
    if not 0 <= index < (1 << size):
        raise ValueError(f"index {index} out of range for {size} modes")
    return tuple((index >> (size - 1 - p)) & 1 for p in range(size))


def family_to_string(bits) -> str:
    """Serialize a family as a bit string, e.g. (1, 0, 0, 1) -> "1001"."""
    return "".join(str(int(b)) for b in bits)


def family_from_string(text: str) -> tuple[int, ...]:
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"not a bit string: {text!r}")
    return tuple(int(c) for c in text)


@dataclass(frozen=True)
class AffectedPartition:
    """Split of the register into affected and unaffected modes.

    Both sublists keep the relative order of the full register; together they
    cover every label exactly once.  Subfamilies carry their own ordered label
    lists through this object rather than positional masks.
    """

    indexing: SystemIndexing
    affected: tuple[str, ...]
    unaffected: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "affected", tuple(self.affected))
        object.__setattr__(self, "unaffected", tuple(self.unaffected))
        labels = self.indexing.labels
        if sorted(self.affected + self.unaffected) != sorted(labels):
            raise ValueError("partition must cover every mode exactly once")
        for sub in (self.affected, self.unaffected):
            pos = self.indexing.positions(sub)
            if list(pos) != sorted(pos):
                raise ValueError("sublists must preserve register order")

    @property
    def affected_count(self) -> int:
        return len(self.affected)

    @cached_property
    def affected_positions(self) -> tuple[int, ...]:
        return self.indexing.positions(self.affected)

    @cached_property
    def unaffected_positions(self) -> tuple[int, ...]:
        return self.indexing.positions(self.unaffected)


def partition_from_affected(indexing: SystemIndexing, affected_labels) -> AffectedPartition:
    """Build a partition from the set of affected labels, in register order."""
    wanted = set(affected_labels)
    unknown = wanted - set(indexing.labels)
    if unknown:
        raise KeyError(f"unknown mode labels: {sorted(unknown)}")
    affected = tuple(lab for lab in indexing.labels if lab in wanted)
    unaffected = tuple(lab for lab in indexing.labels if lab not in wanted)
    return AffectedPartition(indexing, affected, unaffected)


def split_family(bits, partition: AffectedPartition) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Project a full family onto (affected subfamily, unaffected subfamily)."""
    bits = tuple(bits)
    if len(bits) != partition.indexing.size:
        raise ValueError("family length does not match register size")
    dot = tuple(bits[p] for p in partition.affected_positions)
    vec = tuple(bits[p] for p in partition.unaffected_positions)
    return dot, vec


def merge_subfamilies(dot, vec, partition: AffectedPartition) -> tuple[int, ...]:
    """Interleave two subfamilies back into a full family; inverse of split."""
    dot = tuple(dot)
    vec = tuple(vec)
    if len(dot) != len(partition.affected) or len(vec) != len(partition.unaffected):
        raise ValueError("subfamily lengths do not match the partition")
    out = [0] * partition.indexing.size
    for b, p in zip(dot, partition.affected_positions):
        out[p] = int(b)
    for b, p in zip(vec, partition.unaffected_positions):
        out[p] = int(b)
    return tuple(out)
