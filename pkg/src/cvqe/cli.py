"""End-to-end pipeline runner.

Verbs:

* ``sample``   -- compile the Hamiltonian, build the measurement plan, run
  every planned circuit exactly once, and write the sample archive.
* ``optimize`` -- bind an existing archive and minimize the energy; writes
  the iterate trace, per-evaluation records, a summary, and a convergence
  figure.  Never re-runs circuits.
* ``surface``  -- evaluate the energy over a 2-parameter grid from the same
  archive; writes the grid CSV and a heat-map figure with the descent path
  overlaid when a trace is available.
* ``verify``   -- compare archive-based energies against the dense reference
  at sampled parameter points.

All verbs read one JSON config (``--config``); ``--seed``, ``--shots``,
``--mode``, and ``--out`` override config fields.  Paths inside the config
resolve relative to the config file.  Exit code 0 on success; failures print
a one-line JSON error record to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from math import degrees
from pathlib import Path

import numpy as np

from . import circuits, estimator, oracle, plots
from .ansatz import AnsatzSpec, make_ansatz
from .circuits import CircuitSpec, gateop_from_list, prepare_initial_state, rotation_gates
from .estimator import (
    CascadeEstimator,
    MeasurementPlan,
    SampleArchive,
    build_plan,
    load_archive,
    plan_fingerprint,
    save_archive,
    write_evaluation_csv,
)
from .hamiltonian import CompiledHamiltonian, compile_hamiltonian, load_hamiltonian
from .optimizer import OptimizerConfig, run_optimizer, write_trace_csv

__all__ = ["RunConfig", "load_run_config", "execute_plan", "main"]


@dataclass
class RunConfig:
    hamiltonian_path: Path
    initial_circuit: CircuitSpec
    ansatz_name: str
    output_dir: Path
    mode: str = "exact"
    shots: int = 100_000
    seed: int = 0
    optimizer: dict | None = None
    surface: dict | None = None
    verify: bool = False


def load_run_config(path, overrides: dict | None = None) -> RunConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    raw = {**raw, **overrides}
    base = path.parent
    for key in ("hamiltonian", "initial_circuit", "ansatz", "output_dir"):
        if key not in raw:
            raise ValueError(f"config is missing required field {key!r}")
    circ = raw["initial_circuit"]
    spec = CircuitSpec(int(circ["qubits"]),
                       tuple(gateop_from_list(g) for g in circ.get("gates", [])))
    mode = str(raw.get("mode", "exact"))
    if mode not in ("exact", "shot"):
        raise ValueError(f"mode must be 'exact' or 'shot', got {mode!r}")
    return RunConfig(
        hamiltonian_path=(base / raw["hamiltonian"]).resolve(),
        initial_circuit=spec,
        ansatz_name=str(raw["ansatz"]),
        output_dir=(base / raw["output_dir"]).resolve(),
        mode=mode,
        shots=int(raw.get("shots", 100_000)),
        seed=int(raw.get("seed", 0)),
        optimizer=raw.get("optimizer"),
        surface=raw.get("surface"),
        verify=bool(raw.get("verify", False)),
    )


def _build_problem(cfg: RunConfig):
    h = load_hamiltonian(cfg.hamiltonian_path)
    if cfg.initial_circuit.qubits != h.indexing.size:
        raise ValueError("initial circuit register does not match the Hamiltonian")
    compiled = compile_hamiltonian(h)
    plan = build_plan(compiled)
    spec = make_ansatz(cfg.ansatz_name, h.indexing)
    return h, compiled, plan, spec


def _optimizer_config(cfg: RunConfig, dim: int) -> OptimizerConfig:
    raw = dict(cfg.optimizer or {})
    theta0 = raw.pop("theta0", [0.0] * dim)
    return OptimizerConfig(
        theta0=tuple(float(x) for x in theta0),
        method=str(raw.pop("method", "gradient_descent")),
        step_size=raw.pop("step_size", 1.0),
        max_iters=int(raw.pop("max_iters", 200)),
        param_tol=float(raw.pop("param_tol", 1e-6)),
        energy_tol=float(raw.pop("energy_tol", 1e-6)),
    )


def execute_plan(compiled: CompiledHamiltonian, plan: MeasurementPlan,
                 initial_circuit: CircuitSpec, mode: str, shots: int,
                 seed: int) -> SampleArchive:
    """Run every planned circuit exactly once and collect the archive."""
    psi0 = prepare_initial_state(initial_circuit)
    indexing = compiled.indexing
    samples = {}
    for key in sorted(plan.circuits):
        pc = plan.circuits[key]
        state = psi0
        if pc.affected:
            positions = indexing.positions(pc.affected)
            for gate in rotation_gates(indexing.size, positions, pc.axes):
                state = circuits.apply_gate(state, gate)
        if mode == "exact":
            samples[key] = circuits.exact_sampleset(state, key)
        else:
            samples[key] = circuits.sample(state, shots, seed, key)
    return SampleArchive(
        plan_hash=plan_fingerprint(compiled, plan),
        mode=mode,
        master_seed=None if mode == "exact" else seed,
        shots_per_circuit=None if mode == "exact" else int(shots),
        samples=samples,
    )


def _archive_path(cfg: RunConfig, arg: str | None) -> Path:
    return Path(arg) if arg else cfg.output_dir / "archive.json"


def _bound_estimator(cfg: RunConfig, archive_arg: str | None):
    _, compiled, plan, spec = _build_problem(cfg)
    archive = load_archive(_archive_path(cfg, archive_arg))
    est = CascadeEstimator(compiled, plan, archive, spec)
    return compiled, plan, spec, archive, est


def _deg_list(theta) -> list[float]:
    return [degrees(x) for x in theta]


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def run_sample(cfg: RunConfig, archive_arg: str | None) -> int:
    _, compiled, plan, _ = _build_problem(cfg)
    archive = execute_plan(compiled, plan, cfg.initial_circuit,
                           cfg.mode, cfg.shots, cfg.seed)
    out = _archive_path(cfg, archive_arg)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_archive(archive, out)
    n = len(plan)
    print(f"plan: {n} circuits ({n - 1} rotated + baseline)")
    if cfg.mode == "shot":
        print(f"total shot budget: {n} x {cfg.shots} = {n * cfg.shots}")
    else:
        print("mode exact: full outcome distributions recorded")
    print(f"archive written to {out}")
    return 0


def run_optimize(cfg: RunConfig, archive_arg: str | None, figures: bool) -> int:
    compiled, plan, spec, archive, est = _bound_estimator(cfg, archive_arg)
    opt_cfg = _optimizer_config(cfg, spec.dim)

    evaluations = []
    cache: dict[tuple, object] = {}

    def shared(theta):
        key = tuple(np.asarray(theta, dtype=float).tolist())
        if key not in cache:
            ev = est.evaluate(theta)
            cache[key] = ev
            evaluations.append(ev)
        return cache[key]

    before = circuits.execution_count()
    trace = run_optimizer(lambda th: shared(th).energy,
                          lambda th: np.array(shared(th).gradient),
                          opt_cfg, domain=spec.domain)
    executed = circuits.execution_count() - before

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(trace, cfg.output_dir / "trace.csv")
    if evaluations:
        write_evaluation_csv(evaluations, cfg.output_dir / "evaluations.csv")

    final = trace.final
    summary = {
        "status": trace.status,
        "message": trace.message,
        "iterations": trace.iterations,
        "circuit_executions_during_optimization": executed,
        "theta_star_rad": list(final.theta),
        "theta_star_deg": _deg_list(final.theta),
        "energy_star": final.energy,
        "initial_energy": trace.points[0].energy if trace.points else None,
        "param_names": list(spec.param_names),
        "archive": {
            "mode": archive.mode,
            "master_seed": archive.master_seed,
            "shots_per_circuit": archive.shots_per_circuit,
            "plan_hash": archive.plan_hash,
            "circuits": len(plan),
        },
    }
    if cfg.verify:
        summary["verification"] = _verification_block(
            cfg, spec, est, points=[final.theta])
    with open(cfg.output_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1)
        fh.write("\n")
    if figures and trace.points:
        plots.render_convergence([p.k for p in trace.points],
                                 [p.energy for p in trace.points],
                                 cfg.output_dir / "convergence.png")

    print(f"status: {trace.status} ({trace.message})")
    for name, rad, deg in zip(spec.param_names, final.theta, _deg_list(final.theta)):
        print(f"  {name}: {rad:.10g} rad = {deg:.8g} deg")
    print(f"  energy: {final.energy:.12g}")
    print(f"  circuit executions during optimization: {executed}")
    print(f"outputs in {cfg.output_dir}")
    return 0 if trace.status != "error" else 1


def _verification_block(cfg: RunConfig, spec: AnsatzSpec,
                        est: CascadeEstimator, points=None, n_random: int = 20) -> dict:
    h = load_hamiltonian(cfg.hamiltonian_path)
    psi0 = prepare_initial_state(cfg.initial_circuit)
    rng = np.random.default_rng((cfg.seed, 0x5EED))
    thetas = [np.asarray(p, dtype=float) for p in (points or [])]
    for _ in range(n_random):
        if spec.domain is not None:
            draw = [rng.uniform(lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo))
                    for lo, hi in spec.domain]
        else:
            draw = rng.normal(0.0, 0.5, size=spec.dim)
        thetas.append(np.asarray(draw, dtype=float))
    deviations = []
    estimates = []
    for theta in thetas:
        e_est = est.energy(theta)
        e_ref = oracle.exact_ansatz_energy(h, spec, theta, psi0)
        estimates.append(e_est)
        deviations.append(abs(e_est - e_ref))
    ground = oracle.ground_state_energy(h)
    block = {
        "points": len(thetas),
        "max_deviation_vs_reference": max(deviations),
        "reference_ground_energy": ground,
        "min_sampled_energy": min(estimates),
        "variational_margin": min(estimates) - ground,
    }
    return block


def run_verify(cfg: RunConfig, archive_arg: str | None, tol: float | None,
               n_points: int) -> int:
    _, _, spec, archive, est = _bound_estimator(cfg, archive_arg)
    block = _verification_block(cfg, spec, est, n_random=n_points)
    block["mode"] = archive.mode
    print(json.dumps(block, indent=1))
    if tol is not None and block["max_deviation_vs_reference"] > tol:
        raise RuntimeError(
            f"verification deviation {block['max_deviation_vs_reference']:.3e} "
            f"exceeds tolerance {tol:.3e}")
    return 0


def run_surface(cfg: RunConfig, archive_arg: str | None, figures: bool,
                trace_arg: str | None) -> int:
    _, plan, spec, _, est = _bound_estimator(cfg, archive_arg)
    if spec.dim != 2:
        raise ValueError("surface mapping needs a two-parameter ansatz")
    sconf = dict(cfg.surface or {})
    shape = sconf.get("shape", [50, 50])
    ranges = sconf.get("ranges")
    if ranges is None:
        if spec.domain is None:
            raise ValueError("config needs surface.ranges for an unbounded ansatz")
        ranges = [[lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo)]
                  for lo, hi in spec.domain]
    axis0 = np.linspace(ranges[0][0], ranges[0][1], int(shape[0]))
    axis1 = np.linspace(ranges[1][0], ranges[1][1], int(shape[1]))
    energies = np.empty((axis0.size, axis1.size))
    for i, a in enumerate(axis0):
        for j, b in enumerate(axis1):
            energies[i, j] = est.energy([a, b])

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    grid_path = cfg.output_dir / "surface.csv"
    with open(grid_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_0_rad", "theta_1_rad",
                         "theta_0_deg", "theta_1_deg", "energy"])
        for i, a in enumerate(axis0):
            for j, b in enumerate(axis1):
                writer.writerow([f"{a:.17g}", f"{b:.17g}",
                                 f"{degrees(a):.17g}", f"{degrees(b):.17g}",
                                 f"{energies[i, j]:.17g}"])

    path_deg = None
    trace_path = Path(trace_arg) if trace_arg else cfg.output_dir / "trace.csv"
    if trace_path.exists():
        path_deg = _descent_path_degrees(trace_path)
    if figures:
        plots.render_energy_surface(
            np.degrees(axis0), np.degrees(axis1), energies,
            cfg.output_dir / "energy_surface.png",
            path_deg=path_deg, axis_names=spec.param_names)

    imin, jmin = np.unravel_index(int(np.argmin(energies)), energies.shape)
    print(f"grid: {axis0.size} x {axis1.size} points -> {grid_path}")
    print(f"minimum grid energy {energies[imin, jmin]:.10g} at "
          f"({spec.param_names[0]}={degrees(axis0[imin]):.6g} deg, "
          f"{spec.param_names[1]}={degrees(axis1[jmin]):.6g} deg)")
    return 0


def _descent_path_degrees(trace_path: Path) -> np.ndarray | None:
    with open(trace_path, "r", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "theta_0_deg" not in rows[0] or "theta_1_deg" not in rows[0]:
        return None
    return np.array([[float(r["theta_0_deg"]), float(r["theta_1_deg"])]
                     for r in rows])


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--archive", help="sample archive path "
                        "(default: <output_dir>/archive.json)")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--shots", type=int, help="override shots per circuit")
    parser.add_argument("--mode", choices=["exact", "shot"], help="override sampling mode")
    parser.add_argument("--out", help="override the output directory")


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvqe",
        description="Sample a fixed circuit set once, then estimate and "
                    "minimize the energy classically.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sample", help="run the measurement plan once")
    _add_common(p)

    p = sub.add_parser("optimize", help="minimize the energy from an archive")
    _add_common(p)
    p.add_argument("--no-figures", action="store_true", help="skip PNG output")

    p = sub.add_parser("surface", help="map the energy over a 2-parameter grid")
    _add_common(p)
    p.add_argument("--no-figures", action="store_true", help="skip PNG output")
    p.add_argument("--trace", help="trace CSV to overlay on the surface figure")

    p = sub.add_parser("verify", help="compare against the dense reference")
    _add_common(p)
    p.add_argument("--tol", type=float, help="fail if the max deviation exceeds this")
    p.add_argument("--points", type=int, default=20, help="random check points")
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    overrides = {"seed": args.seed, "shots": args.shots,
                 "mode": args.mode, "output_dir": args.out}
    try:
        cfg = load_run_config(args.config, overrides)
        if args.verb == "sample":
            return run_sample(cfg, args.archive)
        if args.verb == "optimize":
            return run_optimize(cfg, args.archive, figures=not args.no_figures)
        if args.verb == "surface":
            return run_surface(cfg, args.archive, figures=not args.no_figures,
                               trace_arg=args.trace)
        if args.verb == "verify":
            return run_verify(cfg, args.archive, args.tol, args.points)
        raise ValueError(f"unknown verb {args.verb!r}")
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports and exits
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
