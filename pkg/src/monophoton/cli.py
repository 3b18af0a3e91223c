"""Command-line experiment runner.

    monophoton run CONFIG [--output DIR] [--dump-state]
    monophoton validate CONFIG

Exit codes: 0 success, 2 config error, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import math
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import _kernels, records
from .config import ConfigError, ExperimentConfig, load, parse, validate
from .fock import PureState, fidelity, superpose, basis_state, ModeRegister, to_records
from .measurement import RandomStream, outcome_distribution, sample_indices
from .optics import BeamSplitterParams
from .protocols import (
    BELL_MODES,
    QubitAmplitudes,
    alice_output,
    bell_correlation_form,
    bell_inequality_holds,
    entangled_input_state,
    generate_entangled,
    mz_output_state,
    mz_probability,
    mz_simulated_probability,
    run_bell_experiment,
    summarize_teleport,
    teleport_batch,
    teleport_entangled_batch,
    teleport_input_state,
    verify_teleportation,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

SCAN_FIELDS = (
    "phi_a", "phi_b", "p_analytic", "n_a", "n_b", "n_ab", "margin",
    "violated", "p_ac", "p_bc", "p_ab", "corr_satisfied",
)
TELEPORT_CSV_FIELDS = (
    "trial_seed", "kind", "e", "f", "correction_applied", "fidelity_to_target",
)
SIGMA_BAND = 5.0
FIDELITY_TOL = 1e-12
ANALYTIC_TOL = 1e-12


class InvariantBreach(RuntimeError):
    pass


@dataclass
class RunOutput:
    records: list[dict]
    summary: dict
    csv_header: tuple[str, ...]
    csv_rows: list[dict]
    states: list[tuple[dict, PureState]] = field(default_factory=list)


def _state_doc(state: PureState, **extra: Any) -> dict:
    return {**extra, "modes": list(state.labels), "cutoff": state.register.cutoff,
            "amplitudes": to_records(state)}


def _binomial_band(p: float, n: int) -> float:
    return SIGMA_BAND * math.sqrt(p * (1 - p) / n)


def _run_entangle(cfg: ExperimentConfig) -> RunOutput:
    state = generate_entangled()
    ideal = superpose([(1.0, basis_state(ModeRegister("AB"), (1, 0))),
                       (1.0, basis_state(ModeRegister("AB"), (0, 1)))])
    fid = fidelity(state, ideal)
    if abs(fid - 1.0) > FIDELITY_TOL:
        raise InvariantBreach(f"source state fidelity {fid!r} != 1")
    dist = outcome_distribution(state, ("A", "B"))
    idx = sample_indices(dist, cfg.seed, 0, cfg.trials)
    hist = np.bincount(idx, minlength=len(dist))
    recs = [{"trial_seed": (cfg.seed + i) & _kernels.MASK64, "event": dist.events[k].as_dict()}
            for i, k in enumerate(idx.tolist())]
    summary = {
        "experiment": cfg.experiment,
        "n_trials": cfg.trials,
        "fidelity_to_expected": fid,
        "probabilities": {str(e): float(p) for e, p in zip(dist.events, dist.probabilities)},
        "counts": {str(e): int(n) for e, n in zip(dist.events, hist)},
    }
    rows = [{"trial_seed": r["trial_seed"], "a": r["event"]["A"], "b": r["event"]["B"]} for r in recs]
    return RunOutput(recs, summary, ("trial_seed", "a", "b"), rows, [({}, state)])


def _teleport_output(cfg: ExperimentConfig, recs, prepared: PureState, extra: dict) -> RunOutput:
    exact = outcome_distribution(alice_output(prepared), BELL_MODES)
    if abs(float(exact.probabilities.sum()) - 1.0) > 1e-12:
        raise InvariantBreach("Bell-sector probabilities do not sum to 1")
    for rec in recs:
        if rec.correction_applied != (rec.outcome.kind.value == "PsiMinus"):
            raise InvariantBreach(f"trial {rec.trial_seed}: correction flag inconsistent")
        if rec.success and abs(rec.fidelity_to_target - 1.0) > FIDELITY_TOL:
            raise InvariantBreach(f"trial {rec.trial_seed}: fidelity {rec.fidelity_to_target!r}")
    summ = summarize_teleport(recs)
    band = _binomial_band(0.5, cfg.trials)
    summary = {
        "experiment": cfg.experiment,
        **summ.to_dict(),
        "expected_success_fraction": 0.5,
        "success_band_5sigma": band,
        "success_within_band": abs(summ.success_fraction - 0.5) <= band,
        "exact_sector_probabilities": {str(e): float(p) for e, p in zip(exact.events, exact.probabilities)},
        **extra,
    }
    rows = [{
        "trial_seed": r.trial_seed,
        "kind": r.outcome.kind.value,
        "e": r.outcome.event["E"],
        "f": r.outcome.event["F"],
        "correction_applied": r.correction_applied,
        "fidelity_to_target": r.fidelity_to_target,
    } for r in recs]
    return RunOutput([r.to_dict() for r in recs], summary, TELEPORT_CSV_FIELDS, rows,
                     [({}, prepared)])


def _run_teleport(cfg: ExperimentConfig) -> RunOutput:
    target = QubitAmplitudes(*cfg.qubit)
    recs = teleport_batch(target, cfg.trials, cfg.seed)
    return _teleport_output(cfg, recs, teleport_input_state(target), {})


def _run_teleport_entangled(cfg: ExperimentConfig) -> RunOutput:
    params = BeamSplitterParams(*cfg.bs)
    recs = teleport_entangled_batch(params, cfg.trials, cfg.seed)
    checked = {}
    for rec in recs:
        if rec.bob_state is not None and rec.outcome.kind.value not in checked:
            checked[rec.outcome.kind.value] = verify_teleportation(rec.bob_state, params)
    for kind, p in checked.items():
        if abs(p - 1.0) > FIDELITY_TOL:
            raise InvariantBreach(f"{kind}: verification probability {p!r} != 1")
    extra = {"verification_probability": dict(sorted(checked.items()))}
    return _teleport_output(cfg, recs, entangled_input_state(params), extra)


def scan_row(phi_a: float, phi_b: float, n_trials: int, stream: RandomStream):
    counts = run_bell_experiment(phi_a, phi_b, n_trials, stream)
    corr = bell_correlation_form(phi_a, phi_b)
    row = {
        "phi_a": float(phi_a),
        "phi_b": float(phi_b),
        "p_analytic": mz_probability(phi_a, phi_b),
        "n_a": counts.n_a,
        "n_b": counts.n_b,
        "n_ab": counts.n_ab,
        "margin": counts.margin,
        "violated": not bell_inequality_holds(counts),
        "p_ac": corr.p_ac,
        "p_bc": corr.p_bc,
        "p_ab": corr.p_ab,
        "corr_satisfied": corr.satisfied,
    }
    return counts, row


def _run_scan(cfg: ExperimentConfig) -> RunOutput:
    recs, rows, states = [], [], []
    for k, (a, b) in enumerate(cfg.phase_pairs()):
        sim = mz_simulated_probability(a, b)
        if abs(sim - mz_probability(a, b)) > ANALYTIC_TOL:
            raise InvariantBreach(f"simulated P(D)={sim!r} disagrees with sin^2 at ({a}, {b})")
        stream = RandomStream(cfg.seed + 3 * cfg.trials * k)
        counts, row = scan_row(a, b, cfg.trials, stream)
        recs.append(counts.to_dict())
        rows.append(row)
        states.append(({"phi_a": float(a), "phi_b": float(b)}, mz_output_state(a, b)))
    summary = {
        "experiment": cfg.experiment,
        "n_settings": len(rows),
        "trials_per_configuration": cfg.trials,
        "n_violated": sum(r["violated"] for r in rows),
        "violated_at": [[r["phi_a"], r["phi_b"]] for r in rows if r["violated"]],
    }
    return RunOutput(recs, summary, SCAN_FIELDS, rows, states)


RUNNERS = {
    "entangle": _run_entangle,
    "teleport": _run_teleport,
    "teleport-entangled": _run_teleport_entangled,
    "bell-scan": _run_scan,
    "mz-single": _run_scan,
}


def execute(cfg: ExperimentConfig, dump_state: bool = False) -> list[Path]:
    """Run one experiment and write its artifacts; returns the files written."""
    out = RUNNERS[cfg.experiment](cfg)
    cfg.output_path.mkdir(parents=True, exist_ok=True)
    stem = cfg.experiment.replace("-", "_")
    written = []
    if cfg.output_format == "json":
        path = cfg.output_path / f"{stem}.json"
        records.write_json(path, {"records": out.records, "summary": out.summary})
        written.append(path)
    else:
        path = cfg.output_path / f"{stem}.csv"
        records.write_csv(path, out.csv_header, out.csv_rows)
        summary_path = cfg.output_path / "summary.json"
        records.write_json(summary_path, out.summary, indent=2)
        written += [path, summary_path]
    if dump_state:
        docs = [_state_doc(st, **meta) for meta, st in out.states]
        path = cfg.output_path / "state.json"
        records.write_json(path, docs[0] if len(docs) == 1 else docs, indent=2)
        written.append(path)
    return written


def run(config_path: str | Path, output: str | Path | None = None, dump_state: bool = False) -> int:
    try:
        raw = load(config_path)
        if output is not None:
            raw.setdefault("output", {})
            if isinstance(raw["output"], dict):
                raw["output"]["path"] = str(output)
        cfg = parse(raw)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        written = execute(cfg, dump_state)
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"config error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        print(path)
    return EXIT_OK


def _validate_cmd(config_path: str) -> int:
    try:
        problems = validate(load(config_path))
    except ConfigError as exc:
        problems = exc.violations
    for p in problems:
        print(p)
    return EXIT_CONFIG if problems else EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="monophoton", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="output directory (overrides [output] path)")
    p_run.add_argument("--dump-state", action="store_true",
                       help="also write the pre-measurement state to state.json")
    p_val = sub.add_parser("validate", help="list problems with a config file")
    p_val.add_argument("config")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.output, args.dump_state)
    return _validate_cmd(args.config)


if __name__ == "__main__":
    sys.exit(main())
