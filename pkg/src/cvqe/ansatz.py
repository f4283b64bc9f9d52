"""Diagonal phase ansatz families.

The variational state multiplies each occupation family's amplitude by
``exp(i * w(theta, n))`` where ``w`` is the family's complex phase exponent:
a real part rotates the amplitude, an imaginary part reweights it.  A family
may also be EXCLUDED, a symbolic sentinel meaning the amplitude is forced to
zero exactly; excluded families contribute nothing to any estimate and are
never differentiated.

Two built-in families:

* ``jastrow_gutzwiller``: purely imaginary exponent i * sum of one parameter
  per unordered mode pair times both occupations, defined for any register.
* ``bloch_singlet_hubbard``: the two-parameter (latitude, longitude) sphere
  for the half-filled two-mode-per-site dimer, supported on the four
  half-filled families 0110/1001 (+ exponent) and 0011/1100 (- exponent),
  all other families excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fock import SystemIndexing, index_of

__all__ = [
    "EXCLUDED",
    "is_excluded",
    "AnsatzSpec",
    "phase_pair",
    "check_theta",
    "jastrow_gutzwiller",
    "bloch_singlet_hubbard",
    "make_ansatz",
    "register_ansatz",
    "registered_ansatz_names",
]


class _Excluded:
    """Sentinel for families the ansatz removes from the state entirely."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EXCLUDED"


EXCLUDED = _Excluded()


def is_excluded(value) -> bool:
    return value is EXCLUDED


@dataclass(frozen=True)
class AnsatzSpec:
    """A named diagonal phase map with its gradient and parameter domain.

    ``evaluate(theta, family)`` returns the complex exponent or EXCLUDED.
    ``gradient(theta, family)`` returns the d-vector of exponent derivatives
    and is never called on excluded families.  ``domain`` holds closed
    per-parameter clip bounds (already shrunk by a safety margin where the
    mathematical domain is open) or None when unconstrained.
    """

    name: str
    dim: int
    evaluate: Callable
    gradient: Callable
    param_names: tuple[str, ...]
    domain: tuple[tuple[float, float], ...] | None = None


def check_theta(spec: AnsatzSpec, theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=float)
    if arr.shape != (spec.dim,):
        raise ValueError(f"{spec.name} expects {spec.dim} parameters, got shape {arr.shape}")
    return arr


def phase_pair(spec: AnsatzSpec, theta, plus_family, minus_family) -> complex:
    """Transition weight exp(-i conj(w(n+))) * exp(i w(n-)); exactly 0 when
    either family is excluded."""
    wp = spec.evaluate(theta, tuple(plus_family))
    wm = spec.evaluate(theta, tuple(minus_family))
    if is_excluded(wp) or is_excluded(wm):
        return 0j
    return complex(np.exp(-1j * np.conj(wp)) * np.exp(1j * wm))


# ---------------------------------------------------------------------------
# Jastrow-Gutzwiller: one parameter per unordered mode pair
# ---------------------------------------------------------------------------

def jastrow_gutzwiller(indexing: SystemIndexing) -> AnsatzSpec:
    q = indexing.size
    pairs = [(a, b) for a in range(q) for b in range(a + 1, q)]
    names = tuple(f"{indexing.labels[a]}~{indexing.labels[b]}" for a, b in pairs)
    dim = len(pairs)

    def evaluate(theta, family):
        theta = np.asarray(theta, dtype=float)
        bits = tuple(family)
        total = sum(t for t, (a, b) in zip(theta, pairs) if bits[a] and bits[b])
        return 1j * total

    def gradient(theta, family):
        bits = tuple(family)
        return np.array([1j if bits[a] and bits[b] else 0j for a, b in pairs])

    return AnsatzSpec(
        name="jastrow_gutzwiller",
        dim=dim,
        evaluate=evaluate,
        gradient=gradient,
        param_names=names,
        domain=None,
    )


# ---------------------------------------------------------------------------
# Bloch sphere for the half-filled dimer singlet sector
# ---------------------------------------------------------------------------

_COVALENT = (0b0110, 0b1001)   # one particle per site
_IONIC = (0b0011, 0b1100)      # both particles on one site

_LAT_MARGIN = 1e-9


def bloch_singlet_hubbard() -> AnsatzSpec:
    half_pi = np.pi / 2

    def exponent(theta):
        lat, lon = theta
        if not -half_pi < lat < half_pi:
            raise ValueError(f"latitude {lat!r} is outside (-pi/2, pi/2)")
        return lon / 2 - 0.5j * np.log(np.tan(np.pi / 4 + lat / 2))

    def evaluate(theta, family):
        theta = np.asarray(theta, dtype=float)
        idx = index_of(tuple(family))
        if idx in _COVALENT:
            return exponent(theta)
        if idx in _IONIC:
            return -exponent(theta)
        return EXCLUDED

    def grad_exponent(theta):
        lat, lon = theta
        if not -half_pi < lat < half_pi:
            raise ValueError(f"latitude {lat!r} is outside (-pi/2, pi/2)")
        return np.array([-0.5j / np.cos(lat), 0.5 + 0j])

    def gradient(theta, family):
        theta = np.asarray(theta, dtype=float)
        idx = index_of(tuple(family))
        if idx in _COVALENT:
            return grad_exponent(theta)
        if idx in _IONIC:
            return -grad_exponent(theta)
        raise ValueError("gradient requested for an excluded family")

    return AnsatzSpec(
        name="bloch_singlet_hubbard",
        dim=2,
        evaluate=evaluate,
        gradient=gradient,
        param_names=("latitude", "longitude"),
        domain=(
            (-half_pi + _LAT_MARGIN, half_pi - _LAT_MARGIN),
            (-np.pi + _LAT_MARGIN, np.pi),
        ),
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _bloch_factory(indexing: SystemIndexing) -> AnsatzSpec:
    if indexing.size != 4:
        raise ValueError("bloch_singlet_hubbard needs a four-mode register")
    return bloch_singlet_hubbard()


_REGISTRY: dict[str, Callable[[SystemIndexing], AnsatzSpec]] = {
    "jastrow_gutzwiller": jastrow_gutzwiller,
    "bloch_singlet_hubbard": _bloch_factory,
}


def register_ansatz(name: str, factory: Callable[[SystemIndexing], AnsatzSpec]) -> None:
    if name in _REGISTRY:
        raise ValueError(f"ansatz {name!r} is already registered")
    _REGISTRY[name] = factory


def registered_ansatz_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def make_ansatz(name: str, indexing: SystemIndexing) -> AnsatzSpec:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown ansatz {name!r}; registered: {', '.join(registered_ansatz_names())}"
        ) from None
    return factory(indexing)
