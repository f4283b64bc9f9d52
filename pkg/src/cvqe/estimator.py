"""Classical estimation cascade over recorded measurement outcomes.

``build_plan`` deduplicates the measurement circuits a compiled Hamiltonian
needs: one baseline circuit (no rotations) that also serves every term
without affected modes, plus one rotated circuit per distinct pair of
(affected labels, axis choice).  Executing the plan once yields a
``SampleArchive``; binding it in a ``CascadeEstimator`` precomputes, for
every (term, axis choice, recorded outcome), the outcome coefficient and the
pair of merged families whose phase exponents the ansatz must supply.

After binding, every estimate is a weighted sum over those precomputed
triples; evaluating at a new parameter vector only re-evaluates the ansatz
at the unique families involved and never executes a circuit.

Estimates divide by the archive's per-circuit weight total, so SHOT counts
and EXACT probabilities flow through identical code; SHOT mode therefore
requires the same shot count for every circuit.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, check_theta, is_excluded
from .circuits import SampleSet
from .fock import family_of, family_to_string, index_of, merge_subfamilies
from .hamiltonian import CompiledHamiltonian, outcome_coefficient

__all__ = [
    "BASELINE_KEY",
    "PlanCircuit",
    "MeasurementPlan",
    "SampleArchive",
    "CascadeEstimator",
    "EnergyEvaluation",
    "EstimationError",
    "DegenerateAnsatzError",
    "IncompleteArchiveError",
    "InconsistentArchiveError",
    "ArchiveMismatchError",
    "build_plan",
    "rotation_key",
    "plan_fingerprint",
    "save_archive",
    "load_archive",
    "write_evaluation_csv",
]

BASELINE_KEY = "base"

ARCHIVE_FORMAT = "cvqe-archive-v1"


class EstimationError(RuntimeError):
    """Base class for estimation failures."""


class DegenerateAnsatzError(EstimationError):
    """The squared-norm estimate is zero: every sampled family is excluded."""


class IncompleteArchiveError(EstimationError):
    """The archive lacks sample sets for some planned circuits."""


class InconsistentArchiveError(EstimationError):
    """Mixed modes or unequal shot counts across the archive's circuits."""


class ArchiveMismatchError(EstimationError):
    """The archive was recorded for a different Hamiltonian or plan."""


def rotation_key(affected_labels, axes) -> str:
    return "rot:" + "+".join(affected_labels) + ":" + "".join(axes)


@dataclass(frozen=True)
class PlanCircuit:
    """One deduplicated circuit: where to rotate, and which (term, axes)
    pairs it serves."""

    affected: tuple[str, ...]
    axes: tuple[str, ...]
    serves: tuple[tuple[int, tuple[str, ...]], ...]


@dataclass(frozen=True, eq=True)
class MeasurementPlan:
    baseline_key: str
    circuits: dict[str, PlanCircuit] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.circuits)


def build_plan(compiled: CompiledHamiltonian) -> MeasurementPlan:
    """Deduplicate circuits by (affected labels, axis choice); the baseline
    exists even when no term needs it, since the norm estimate always does."""
    staging: dict[str, dict] = {
        BASELINE_KEY: {"affected": (), "axes": (), "serves": []}
    }
    for l, ct in enumerate(compiled.terms):
        labels = ct.partition.affected
        for m in ct.measurement_families:
            key = BASELINE_KEY if not labels else rotation_key(labels, m)
            entry = staging.setdefault(key, {"affected": labels, "axes": m, "serves": []})
            entry["serves"].append((l, m))
    circuits = {
        key: PlanCircuit(tuple(v["affected"]), tuple(v["axes"]), tuple(v["serves"]))
        for key, v in staging.items()
    }
    return MeasurementPlan(BASELINE_KEY, circuits)


def plan_fingerprint(compiled: CompiledHamiltonian, plan: MeasurementPlan) -> str:
    """Content hash binding an archive to its Hamiltonian and plan."""
    payload = {
        "modes": list(compiled.indexing.labels),
        "terms": [
            [ct.term.coeff.real, ct.term.coeff.imag,
             family_to_string(ct.term.create), family_to_string(ct.term.annihilate)]
            for ct in compiled.terms
        ],
        "circuits": sorted(
            [key, list(pc.affected), "".join(pc.axes)]
            for key, pc in plan.circuits.items()
        ),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


@dataclass
class SampleArchive:
    """All sample sets for one executed plan, with provenance."""

    plan_hash: str
    mode: str
    master_seed: int | None
    shots_per_circuit: int | None
    samples: dict[str, SampleSet]


def save_archive(archive: SampleArchive, path) -> None:
    data = {
        "format": ARCHIVE_FORMAT,
        "plan_hash": archive.plan_hash,
        "mode": archive.mode,
        "master_seed": archive.master_seed,
        "shots_per_circuit": archive.shots_per_circuit,
        "samples": {key: ss.to_dict() for key, ss in sorted(archive.samples.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")


def load_archive(path) -> SampleArchive:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != ARCHIVE_FORMAT:
        raise ValueError(f"not a sample archive: {path}")
    samples = {key: SampleSet.from_dict(d) for key, d in data["samples"].items()}
    return SampleArchive(
        plan_hash=data["plan_hash"],
        mode=data["mode"],
        master_seed=data["master_seed"],
        shots_per_circuit=data["shots_per_circuit"],
        samples=samples,
    )


@dataclass(frozen=True)
class EnergyEvaluation:
    """One parameter point: estimates, energy, and energy gradient."""

    theta: tuple[float, ...]
    norm_value: float
    hamiltonian_value: complex
    energy: float
    gradient: tuple[float, ...]


def write_evaluation_csv(evaluations, path) -> None:
    evaluations = list(evaluations)
    if not evaluations:
        raise ValueError("no evaluations to write")
    d = len(evaluations[0].theta)
    header = [f"theta_{i}" for i in range(d)]
    header += ["norm", "ham_re", "ham_im", "energy"]
    header += [f"grad_{i}" for i in range(d)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ev in evaluations:
            row = [f"{x:.17g}" for x in ev.theta]
            row += [f"{ev.norm_value:.17g}",
                    f"{ev.hamiltonian_value.real:.17g}",
                    f"{ev.hamiltonian_value.imag:.17g}",
                    f"{ev.energy:.17g}"]
            row += [f"{g:.17g}" for g in ev.gradient]
            writer.writerow(row)


class CascadeEstimator:
    """Parameter-dependent estimation bound to one archive.

    All circuit data is folded into flat arrays at construction; afterwards
    each method is a closed-form reduction over those arrays plus one ansatz
    evaluation per unique family, with a fixed summation order so repeated
    runs are bit-identical.
    """

    def __init__(self, compiled: CompiledHamiltonian, plan: MeasurementPlan,
                 archive: SampleArchive, spec: AnsatzSpec, check_hash: bool = True):
        self.compiled = compiled
        self.plan = plan
        self.archive = archive
        self.spec = spec
        if check_hash and archive.plan_hash:
            expect = plan_fingerprint(compiled, plan)
            if archive.plan_hash != expect:
                raise ArchiveMismatchError(
                    "archive was recorded for a different Hamiltonian or plan")
        self._bind()

    # -- binding -----------------------------------------------------------

    def _bind(self) -> None:
        plan, archive = self.plan, self.archive
        missing = sorted(set(plan.circuits) - set(archive.samples))
        if missing:
            raise IncompleteArchiveError(f"archive lacks circuits: {missing}")
        totals = set()
        for key in plan.circuits:
            ss = archive.samples[key]
            if ss.mode != archive.mode:
                raise InconsistentArchiveError(
                    f"circuit {key!r} recorded in mode {ss.mode!r}, archive says {archive.mode!r}")
            totals.add(ss.total_weight)
        if archive.mode == "shot" and len(totals) > 1:
            raise InconsistentArchiveError(
                f"shot counts differ across circuits: {sorted(totals)}")
        self._total = float(next(iter(totals)))

        q = self.compiled.indexing.size
        base = archive.samples[plan.baseline_key]
        norm_pairs = [(index_of(bits), float(w)) for bits, w in base.entries]
        norm_pairs.sort()

        pair_sums: dict[tuple[int, int], complex] = {}
        for key in sorted(plan.circuits):
            pc = plan.circuits[key]
            ss = archive.samples[key]
            for l, m in pc.serves:
                ct = self.compiled.terms[l]
                part = ct.partition
                vec_pos = part.unaffected_positions
                for bits, w in ss.entries:
                    coeff = outcome_coefficient(ct, m, bits) * w
                    if coeff == 0:
                        continue
                    vec = tuple(bits[p] for p in vec_pos)
                    ip = index_of(merge_subfamilies(ct.dot_n_plus, vec, part))
                    im = index_of(merge_subfamilies(ct.dot_n_minus, vec, part))
                    pair_sums[(ip, im)] = pair_sums.get((ip, im), 0j) + coeff

        fam_ints = sorted(
            {i for i, _ in norm_pairs}
            | {i for pair in pair_sums for i in pair}
        )
        row = {i: k for k, i in enumerate(fam_ints)}
        self._fam_bits = [family_of(i, q) for i in fam_ints]
        self._norm_rows = np.array([row[i] for i, _ in norm_pairs], dtype=np.intp)
        self._norm_w = np.array([w for _, w in norm_pairs], dtype=float)
        pairs = sorted(pair_sums)
        self._plus = np.array([row[ip] for ip, _ in pairs], dtype=np.intp)
        self._minus = np.array([row[im] for _, im in pairs], dtype=np.intp)
        self._coeff = np.array([pair_sums[p] for p in pairs], dtype=complex)

    # -- per-theta tables --------------------------------------------------

    def _phases(self, theta) -> tuple[np.ndarray, np.ndarray]:
        lam = np.zeros(len(self._fam_bits), dtype=complex)
        excl = np.zeros(len(self._fam_bits), dtype=bool)
        for k, bits in enumerate(self._fam_bits):
            w = self.spec.evaluate(theta, bits)
            if is_excluded(w):
                excl[k] = True
            else:
                lam[k] = w
        return lam, excl

    def _phase_grads(self, theta, excl: np.ndarray) -> np.ndarray:
        grads = np.zeros((len(self._fam_bits), self.spec.dim), dtype=complex)
        for k, bits in enumerate(self._fam_bits):
            if not excl[k]:
                grads[k] = self.spec.gradient(theta, bits)
        return grads

    # -- estimates ---------------------------------------------------------

    def _norm_terms(self, lam, excl) -> np.ndarray:
        rows = self._norm_rows
        factors = np.where(excl[rows], 0.0, np.exp(-2.0 * lam.imag[rows]))
        return self._norm_w * factors

    def _pair_phases(self, lam, excl) -> np.ndarray:
        lp = lam[self._plus]
        lm = lam[self._minus]
        dead = excl[self._plus] | excl[self._minus]
        phases = np.exp(-1j * np.conj(lp)) * np.exp(1j * lm)
        return np.where(dead, 0j, phases)

    def norm_value(self, theta) -> float:
        theta = check_theta(self.spec, theta)
        lam, excl = self._phases(theta)
        value = float(self._norm_terms(lam, excl).sum() / self._total)
        if value == 0.0:
            raise DegenerateAnsatzError(
                "norm estimate is zero: the ansatz excludes every sampled family")
        return value

    def norm_gradient(self, theta) -> np.ndarray:
        theta = check_theta(self.spec, theta)
        lam, excl = self._phases(theta)
        terms = self._norm_terms(lam, excl)
        if float(terms.sum()) == 0.0:
            raise DegenerateAnsatzError(
                "norm estimate is zero: the ansatz excludes every sampled family")
        grads = self._phase_grads(theta, excl)
        pull = -2.0 * grads.imag[self._norm_rows]
        return (terms[:, None] * pull).sum(axis=0) / self._total

    def hamiltonian_value(self, theta) -> complex:
        theta = check_theta(self.spec, theta)
        lam, excl = self._phases(theta)
        return complex((self._coeff * self._pair_phases(lam, excl)).sum() / self._total)

    def hamiltonian_gradient(self, theta) -> np.ndarray:
        theta = check_theta(self.spec, theta)
        lam, excl = self._phases(theta)
        grads = self._phase_grads(theta, excl)
        phases = self._pair_phases(lam, excl)
        bracket = -1j * np.conj(grads[self._plus]) + 1j * grads[self._minus]
        return ((self._coeff * phases)[:, None] * bracket).sum(axis=0) / self._total

    def energy(self, theta) -> float:
        return self.evaluate(theta, with_gradient=False).energy

    def energy_gradient(self, theta) -> np.ndarray:
        return np.array(self.evaluate(theta, with_gradient=True).gradient)

    def evaluate(self, theta, with_gradient: bool = True) -> EnergyEvaluation:
        """One shared pass: phase tables once, then all estimates."""
        theta = check_theta(self.spec, theta)
        lam, excl = self._phases(theta)
        norm_terms = self._norm_terms(lam, excl)
        norm = float(norm_terms.sum() / self._total)
        if norm == 0.0:
            raise DegenerateAnsatzError(
                "norm estimate is zero: the ansatz excludes every sampled family")
        phases = self._pair_phases(lam, excl)
        ham = complex((self._coeff * phases).sum() / self._total)
        energy = ham.real / norm
        grad: tuple[float, ...] = ()
        if with_gradient:
            grads = self._phase_grads(theta, excl)
            pull = -2.0 * grads.imag[self._norm_rows]
            norm_grad = (norm_terms[:, None] * pull).sum(axis=0) / self._total
            bracket = -1j * np.conj(grads[self._plus]) + 1j * grads[self._minus]
            ham_grad = ((self._coeff * phases)[:, None] * bracket).sum(axis=0) / self._total
            grad = tuple((ham_grad.real / norm - ham.real * norm_grad / norm ** 2).tolist())
        return EnergyEvaluation(
            theta=tuple(theta.tolist()),
            norm_value=norm,
            hamiltonian_value=ham,
            energy=energy,
            gradient=grad,
        )
