"""Command-line interface and on-disk file formats.

Instance files are JSON objects {"set_sizes", "modalities", "scores",
optional "metadata"} where scores is a list of {"a", "b", "s"} entries with
global indices a < b and s holding one value per modality.  All-0.5 score
vectors are omitted on write since they equal the cross-set default.
Result files carry clusters, both objective values, the convergence flag, a
continuation trace and the effective solver configuration; runs are
byte-reproducible for a fixed seed.

Exit codes: 0 success (solve: converged), 2 solve fell back to repair,
1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .bench import (ablation, format_ablation_table, format_gap_table,
                    monte_carlo_gap, precision_recall, write_ablation_csv,
                    write_gap_csv)
from .core import (Assignment, InfeasibleAssignmentError, Instance,
                   InvalidInstanceError, assignment_from_clusters,
                   check_cycle_consistency, check_feasible,
                   clusters_from_assignment, pairwise_from_assignment)
from .oracle import InstanceTooLargeError, OracleConfig, solve_exact
from .relax import build_relaxation, relaxed_objective
from .solver import SolverConfig, SolverResult, solve
from .synth import GroundTruth, SynthConfig, derive_seed, generate

INSTANCE_FIELDS = {"set_sizes", "modalities", "scores", "metadata"}
SCORE_FIELDS = {"a", "b", "s"}
RESULT_FIELDS = {"clusters", "relaxed_value", "frobenius_value", "converged",
                 "trace", "config"}
TRUTH_FIELDS = {"set_sizes", "labels"}

_SOLVER_FLAGS = ("d_init", "d_growth", "d_max", "armijo_sigma", "armijo_beta",
                 "step_init", "inner_tol", "max_inner_iters", "binary_tol")


class FileFormatError(ValueError):
    """A file failed schema validation; the message names the offender."""


def _load_json(path: str | Path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from exc


def _dump_json(payload: Any, path: str | Path | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _require_fields(data: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(data, dict):
        raise FileFormatError(f"{where}: expected a JSON object")
    unknown = set(data) - allowed
    if unknown:
        raise FileFormatError(f"{where}: unknown field '{sorted(unknown)[0]}'")
    missing = required - set(data)
    if missing:
        raise FileFormatError(f"{where}: missing field '{sorted(missing)[0]}'")


def read_instance(path: str | Path) -> Instance:
    data = _load_json(path)
    _require_fields(data, INSTANCE_FIELDS, {"set_sizes", "modalities", "scores"}, str(path))
    sizes = data["set_sizes"]
    if (not isinstance(sizes, list) or not sizes
            or not all(isinstance(s, int) and s >= 1 for s in sizes)):
        raise FileFormatError(f"{path}: set_sizes: expected positive integers")
    count = data["modalities"]
    if not isinstance(count, int) or count < 1:
        raise FileFormatError(f"{path}: modalities: expected a positive integer")
    if not isinstance(data["scores"], list):
        raise FileFormatError(f"{path}: scores: expected a list")
    m = sum(sizes)
    scores = {}
    for idx, entry in enumerate(data["scores"]):
        where = f"{path}: scores[{idx}]"
        _require_fields(entry, SCORE_FIELDS, SCORE_FIELDS, where)
        a, b, vec = entry["a"], entry["b"], entry["s"]
        if not isinstance(a, int) or not isinstance(b, int):
            raise FileFormatError(f"{where}: a and b must be integers")
        if not 0 <= a < b < m:
            raise FileFormatError(f"{where}: indices must satisfy 0 <= a < b < {m}")
        if not isinstance(vec, list) or len(vec) != count:
            raise FileFormatError(f"{where}.s: expected {count} values")
        for k, x in enumerate(vec):
            if not isinstance(x, (int, float)) or isinstance(x, bool) or not 0 <= x <= 1:
                raise FileFormatError(f"{where}.s[{k}]: scores must lie in [0, 1]")
        if (a, b) in scores:
            raise FileFormatError(f"{where}: duplicate pair ({a}, {b})")
        scores[(a, b)] = tuple(float(x) for x in vec)
    try:
        return Instance(tuple(sizes), count, scores)
    except InvalidInstanceError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_instance(instance: Instance, path: str | Path | None,
                   metadata: dict | None = None) -> None:
    default = (0.5,) * instance.modality_count
    entries = [{"a": a, "b": b, "s": list(vec)}
               for (a, b), vec in sorted(instance.scores.items())
               if vec != default]
    payload: dict[str, Any] = {
        "set_sizes": list(instance.set_sizes),
        "modalities": instance.modality_count,
        "scores": entries,
    }
    if metadata is not None:
        payload["metadata"] = metadata
    _dump_json(payload, path)


def read_truth(path: str | Path) -> GroundTruth:
    data = _load_json(path)
    _require_fields(data, TRUTH_FIELDS, TRUTH_FIELDS, str(path))
    sizes, labels = data["set_sizes"], data["labels"]
    if (not isinstance(sizes, list)
            or not all(isinstance(s, int) and s >= 1 for s in sizes)):
        raise FileFormatError(f"{path}: set_sizes: expected positive integers")
    if not isinstance(labels, list) or not all(isinstance(x, int) for x in labels):
        raise FileFormatError(f"{path}: labels: expected integers")
    if len(labels) != sum(sizes):
        raise FileFormatError(
            f"{path}: labels: expected {sum(sizes)} entries, got {len(labels)}")
    try:
        return GroundTruth.from_labels(labels, sizes)
    except InfeasibleAssignmentError as exc:
        raise FileFormatError(f"{path}: {exc}") from exc


def write_truth(truth: GroundTruth, set_sizes: Sequence[int],
                path: str | Path | None) -> None:
    _dump_json({"set_sizes": [int(s) for s in set_sizes],
                "labels": list(truth.labels)}, path)


def result_payload(result: SolverResult, config: dict) -> dict:
    clusters = [[int(r) for r in np.flatnonzero(result.assignment.entries[:, c])]
                for c in range(result.assignment.num_clusters)]
    return {
        "clusters": clusters,
        "relaxed_value": result.relaxed_value,
        "frobenius_value": result.frobenius_value,
        "converged": result.converged,
        "trace": [{"d": s.d, "inner_iterations": s.inner_iterations,
                   "objective": s.objective} for s in result.trace],
        "config": config,
    }


def read_result(path: str | Path) -> dict:
    data = _load_json(path)
    _require_fields(data, RESULT_FIELDS, {"clusters"}, str(path))
    clusters = data["clusters"]
    if not isinstance(clusters, list) or not all(
            isinstance(c, list) and all(isinstance(x, int) for x in c)
            for c in clusters):
        raise FileFormatError(f"{path}: clusters: expected lists of integers")
    return data


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    fields: dict[str, Any] = {}
    if getattr(args, "config", None):
        data = _load_json(args.config)
        allowed = set(SolverConfig.__dataclass_fields__)
        _require_fields(data, allowed, set(), str(args.config))
        fields.update(data)
    for name in _SOLVER_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if getattr(args, "seed", None) is not None:
        fields["rng_seed"] = args.seed
    try:
        return SolverConfig(**fields)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"solver configuration: {exc}") from exc


def _config_echo(cfg: SolverConfig, instance: Instance) -> dict:
    echo = asdict(cfg)
    echo["d_init"] = cfg.resolved_d_init(instance.modality_count)
    echo["d_max"] = cfg.resolved_d_max(instance.modality_count)
    echo["inner_tol"] = cfg.resolved_inner_tol(instance.num_elements)
    return echo


def cmd_solve(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    cfg = _solver_config(args)
    result = solve(instance, cfg)
    _dump_json(result_payload(result, _config_echo(cfg, instance)), args.out)
    labeling = clusters_from_assignment(result.assignment)
    print(f"converged={result.converged} clusters={labeling.num_clusters} "
          f"frobenius={result.frobenius_value:.6g} relaxed={result.relaxed_value:.6g}")
    if args.truth:
        truth = read_truth(args.truth)
        if len(truth.labels) != instance.num_elements:
            raise FileFormatError(
                f"{args.truth}: labels: expected {instance.num_elements} entries")
        metrics = precision_recall(labeling, truth)
        print(f"precision={metrics.precision:.4f} recall={metrics.recall:.4f} "
              f"f1={metrics.f1:.4f}")
    return 0 if result.converged else 2


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = read_instance(args.instance)
    cfg = OracleConfig(max_elements=args.max_elements,
                       report_all_optima=args.report_all_optima)
    result = solve_exact(instance, cfg)
    data = build_relaxation(instance)
    payload = {
        "clusters": [[int(r) for r in np.flatnonzero(result.assignment.entries[:, c])]
                     for c in range(result.assignment.num_clusters)],
        "relaxed_value": relaxed_objective(
            result.assignment.entries.astype(float), data, 0.0),
        "frobenius_value": result.value,
        "converged": True,
        "trace": [],
        "config": asdict(cfg),
    }
    _dump_json(payload, args.out)
    print(f"optimum={result.value:.6g} clusters={result.assignment.num_clusters} "
          f"optima={len(result.optima)}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    base = SynthConfig(
        universe_size=args.universe_size, num_sets=args.num_sets,
        modality_count=args.modalities, observe_prob=args.observe_prob,
        outliers_per_run=args.outliers, noise_sigma=args.noise_sigma,
        inconclusive_rate=args.inconclusive_rate, flip_rate=args.flip_rate,
        rng_seed=args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for t in range(args.trials):
        seed = derive_seed(args.seed, t)
        instance, truth = generate(replace(base, rng_seed=seed))
        metadata = {"seed": seed, "generator": asdict(replace(base, rng_seed=seed))}
        write_instance(instance, out_dir / f"instance_{t:03d}.json", metadata)
        write_truth(truth, instance.set_sizes, out_dir / f"truth_{t:03d}.json")
    print(f"wrote {args.trials} instances to {out_dir}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.ablation:
        rows = ablation(args.trials, args.seed)
        if args.out:
            write_ablation_csv(rows, args.out)
        print(format_ablation_table(rows))
        return 0
    try:
        n_o_values = [int(x) for x in args.outliers.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise FileFormatError(f"--outliers: {exc}") from exc
    base = SynthConfig(
        universe_size=args.universe_size, num_sets=args.num_sets,
        modality_count=args.modalities, observe_prob=args.observe_prob,
        noise_sigma=args.noise_sigma, inconclusive_rate=args.inconclusive_rate,
        flip_rate=args.flip_rate, rng_seed=args.seed)
    rows = monte_carlo_gap(base, n_o_values, args.trials)
    if args.out:
        write_gap_csv(rows, args.out)
    print(format_gap_table(rows))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    result = read_result(args.result)
    instance = read_instance(args.instance)
    m = instance.num_elements
    seen: dict[int, int] = {}
    for c, members in enumerate(result["clusters"]):
        for r in members:
            if not 0 <= r < m:
                print(f"element {r} out of range for {m} elements")
                return 1
            if r in seen:
                print(f"element {r} appears in clusters {seen[r]} and {c}")
                return 1
            seen[r] = c
    if len(seen) != m:
        missing = sorted(set(range(m)) - set(seen))
        print(f"elements missing from clusters: {missing}")
        return 1
    labels = [seen[r] for r in range(m)]
    try:
        assignment = assignment_from_clusters(labels, instance.set_sizes)
    except InfeasibleAssignmentError as exc:
        print(f"infeasible clusters: {exc}")
        return 1
    report = check_feasible(assignment.entries, instance)
    if not report.feasible:
        print(f"infeasible clusters: {report}")
        return 1
    if not check_cycle_consistency(pairwise_from_assignment(assignment)):
        print("pairwise matches are not cycle consistent")
        return 1
    print("ok: clusters are feasible and cycle consistent")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusematch",
        description="Multimodal multiway association: fuse pair scores across "
                    "observation sets into a consistent assignment.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance file")
    p_solve.add_argument("instance")
    p_solve.add_argument("--config", help="JSON file with solver fields")
    p_solve.add_argument("--seed", type=int, help="overrides rng_seed")
    p_solve.add_argument("--truth", help="truth file; prints precision/recall/F1")
    p_solve.add_argument("--out", help="result file path (default: stdout)")
    p_solve.add_argument("--d-init", dest="d_init", type=float)
    p_solve.add_argument("--d-growth", dest="d_growth", type=float)
    p_solve.add_argument("--d-max", dest="d_max", type=float)
    p_solve.add_argument("--armijo-sigma", dest="armijo_sigma", type=float)
    p_solve.add_argument("--armijo-beta", dest="armijo_beta", type=float)
    p_solve.add_argument("--step-init", dest="step_init", type=float)
    p_solve.add_argument("--inner-tol", dest="inner_tol", type=float)
    p_solve.add_argument("--max-inner-iters", dest="max_inner_iters", type=int)
    p_solve.add_argument("--binary-tol", dest="binary_tol", type=float)
    p_solve.set_defaults(func=cmd_solve)

    p_oracle = sub.add_parser("oracle", help="exhaustive exact solve (small instances)")
    p_oracle.add_argument("instance")
    p_oracle.add_argument("--out", help="result file path (default: stdout)")
    p_oracle.add_argument("--max-elements", dest="max_elements", type=int, default=12)
    p_oracle.add_argument("--report-all-optima", dest="report_all_optima",
                          action="store_true")
    p_oracle.set_defaults(func=cmd_oracle)

    p_synth = sub.add_parser("synth", help="generate instance/truth files")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--universe-size", dest="universe_size", type=int, default=10)
    p_synth.add_argument("--num-sets", dest="num_sets", type=int, default=3)
    p_synth.add_argument("--modalities", type=int, default=1)
    p_synth.add_argument("--observe-prob", dest="observe_prob", type=float, default=1.0)
    p_synth.add_argument("--outliers", type=int, default=0)
    p_synth.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.0)
    p_synth.add_argument("--inconclusive-rate", dest="inconclusive_rate",
                         type=float, default=0.0)
    p_synth.add_argument("--flip-rate", dest="flip_rate", type=float, default=0.0)
    p_synth.add_argument("--trials", type=int, default=1)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser("bench", help="outlier sweep or modality ablation")
    p_bench.add_argument("--out", help="CSV output path")
    p_bench.add_argument("--ablation", action="store_true",
                         help="run the modality ablation instead of the sweep")
    p_bench.add_argument("--universe-size", dest="universe_size", type=int, default=3)
    p_bench.add_argument("--num-sets", dest="num_sets", type=int, default=3)
    p_bench.add_argument("--modalities", type=int, default=2)
    p_bench.add_argument("--observe-prob", dest="observe_prob", type=float, default=1.0)
    p_bench.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.15)
    p_bench.add_argument("--inconclusive-rate", dest="inconclusive_rate",
                         type=float, default=0.15)
    p_bench.add_argument("--flip-rate", dest="flip_rate", type=float, default=0.05)
    p_bench.add_argument("--outliers", default="0,1,2,3",
                         help="comma-separated outlier counts")
    p_bench.add_argument("--trials", type=int, default=50)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)

    p_check = sub.add_parser("check", help="validate a result against an instance")
    p_check.add_argument("result")
    p_check.add_argument("instance")
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileFormatError, InvalidInstanceError, InfeasibleAssignmentError,
            InstanceTooLargeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
