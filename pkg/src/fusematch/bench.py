"""Benchmark harness: pairwise metrics, optimality gaps, baselines.

Precision and recall are counted over unordered element pairs: a pair is a
predicted match when both elements share a predicted cluster, a true match
when they share a ground-truth identity.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (Instance, PairwiseTable, clusters_from_assignment)
from .oracle import OracleConfig, solve_exact
from .solver import SolverConfig, solve
from .synth import (GroundTruth, MULTIMODAL_PROFILES, SynthConfig, derive_seed,
                    generate, multimodal_suite, restrict_modalities)

GAP_EPSILON = 1e-9

GAP_CSV_COLUMNS = ("n_o", "gap_mean", "gap_std", "dp_mean", "dp_std",
                   "dr_mean", "dr_std", "runtime_ms")


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    true_positives: int
    false_positives: int
    false_negatives: int


@dataclass(frozen=True)
class TrialRow:
    """Aggregated row of the outlier sweep: mean and population std of the
    optimality gap and of the precision/recall percent changes relative to
    the exact solution, plus mean solver runtime."""

    outliers: int
    gap_mean: float
    gap_std: float
    dp_mean: float
    dp_std: float
    dr_mean: float
    dr_std: float
    runtime_ms: float


@dataclass(frozen=True)
class AblationRow:
    modalities: tuple[int, ...]
    method: str
    f1_mean: float


def _pairs_from_labels(labels: Sequence[int]) -> frozenset[tuple[int, int]]:
    groups: dict = {}
    for idx, lab in enumerate(labels):
        groups.setdefault(lab, []).append(idx)
    pairs = []
    for members in groups.values():
        pairs.extend((members[i], members[j])
                     for i in range(len(members))
                     for j in range(i + 1, len(members)))
    return frozenset(pairs)


def pair_metrics(predicted: frozenset[tuple[int, int]],
                 truth: frozenset[tuple[int, int]]) -> MetricsReport:
    """Metrics over explicit match-pair sets.

    An empty prediction has precision 1 by convention; an empty truth has
    recall 1.  F1 is 0 when precision and recall are both 0.
    """
    tp = len(predicted & truth)
    fp = len(predicted - truth)
    fn = len(truth - predicted)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport(precision=precision, recall=recall, f1=f1,
                         true_positives=tp, false_positives=fp, false_negatives=fn)


def precision_recall(predicted, truth) -> MetricsReport:
    """Pairwise metrics of a predicted labeling against the ground truth.

    Accepts ClusterLabeling/GroundTruth objects or raw label sequences.
    """
    pred_labels = tuple(getattr(predicted, "labels", predicted))
    true_labels = tuple(getattr(truth, "labels", truth))
    if len(pred_labels) != len(true_labels):
        raise ValueError(
            f"labeling lengths differ: {len(pred_labels)} vs {len(true_labels)}")
    return pair_metrics(_pairs_from_labels(pred_labels), _pairs_from_labels(true_labels))


def optimality_gap(f_solver: float, f_oracle: float) -> float:
    """Percent excess of the solver objective over the exact optimum."""
    if f_solver < f_oracle - GAP_EPSILON:
        raise ValueError(
            f"solver value {f_solver} is below the exact optimum {f_oracle}")
    return max(0.0, 100.0 * (f_solver - f_oracle) / max(f_oracle, GAP_EPSILON))


def percent_change(new: float, ref: float) -> float:
    """Percent change of a metric against a reference; 0 when both vanish."""
    if ref <= GAP_EPSILON and new <= GAP_EPSILON:
        return 0.0
    return 100.0 * (new - ref) / max(ref, GAP_EPSILON)


def monte_carlo_gap(base: SynthConfig, n_o_values: Sequence[int], trials: int, *,
                    solver_config: SolverConfig | None = None,
                    oracle_config: OracleConfig | None = None) -> list[TrialRow]:
    """Outlier sweep comparing the solver against exhaustive search.

    For every outlier count, ``trials`` instances are drawn with seeds
    derived from base.rng_seed, so the whole table is reproducible.
    """
    solver_cfg = solver_config if solver_config is not None else SolverConfig()
    oracle_cfg = oracle_config if oracle_config is not None else OracleConfig()
    rows = []
    for n_o in n_o_values:
        gaps, dps, drs, times = [], [], [], []
        for t in range(trials):
            seed = derive_seed(base.rng_seed, n_o, t)
            instance, truth = generate(
                replace(base, outliers_per_run=int(n_o), rng_seed=seed))
            start = time.perf_counter()
            result = solve(instance, replace(solver_cfg, rng_seed=derive_seed(base.rng_seed, n_o, t, 1)))
            times.append((time.perf_counter() - start) * 1e3)
            exact = solve_exact(instance, oracle_cfg)
            gaps.append(optimality_gap(result.frobenius_value, exact.value))
            solver_metrics = precision_recall(
                clusters_from_assignment(result.assignment), truth)
            oracle_metrics = precision_recall(
                clusters_from_assignment(exact.assignment), truth)
            dps.append(percent_change(solver_metrics.precision, oracle_metrics.precision))
            drs.append(percent_change(solver_metrics.recall, oracle_metrics.recall))
        rows.append(TrialRow(
            outliers=int(n_o),
            gap_mean=float(np.mean(gaps)), gap_std=float(np.std(gaps)),
            dp_mean=float(np.mean(dps)), dp_std=float(np.std(dps)),
            dr_mean=float(np.mean(drs)), dr_std=float(np.std(drs)),
            runtime_ms=float(np.mean(times))))
    return rows


def all_pairs_matches(instance: Instance) -> frozenset[tuple[int, int]]:
    """Naive baseline: every pair whose mean modality score exceeds 0.5."""
    return frozenset(pair for pair, vec in instance.scores.items()
                     if float(np.mean(vec)) > 0.5)


def consecutive_matches(instance: Instance) -> frozenset[tuple[int, int]]:
    """Thresholding restricted to pairs from consecutive sets."""
    set_index = instance.set_index
    return frozenset(
        pair for pair, vec in instance.scores.items()
        if abs(int(set_index[pair[0]]) - int(set_index[pair[1]])) == 1
        and float(np.mean(vec)) > 0.5)


def pairwise_from_matches(matches: frozenset[tuple[int, int]],
                          set_sizes: Sequence[int]) -> PairwiseTable:
    """Cross-set match matrices from a raw pair set; same-set pairs are ignored."""
    sizes = tuple(int(s) for s in set_sizes)
    offsets = [0]
    for s in sizes[:-1]:
        offsets.append(offsets[-1] + s)
    set_index = np.repeat(np.arange(len(sizes)), sizes)
    blocks = {}
    for i in range(len(sizes)):
        for j in range(i + 1, len(sizes)):
            blocks[(i, j)] = np.zeros((sizes[i], sizes[j]), dtype=np.int64)
    for a, b in matches:
        i, j = int(set_index[a]), int(set_index[b])
        if i == j:
            continue
        if i > j:
            a, b, i, j = b, a, j, i
        blocks[(i, j)][a - offsets[i], b - offsets[j]] = 1
    return PairwiseTable(sizes, blocks)


def _truth_pairs(truth: GroundTruth) -> frozenset[tuple[int, int]]:
    return _pairs_from_labels(truth.labels)


def ablation(trials: int, base_seed: int = 0, *,
             base: SynthConfig | None = None,
             profiles: Sequence[tuple[float, float, float]] | None = None,
             solver_config: SolverConfig | None = None) -> list[AblationRow]:
    """Mean F1 per modality subset, for the solver and both baselines.

    Each trial draws a fresh multimodality suite.  Subsets are the single
    modalities plus incremental combinations ordered by decreasing
    single-modality solver F1, mirroring a strongest-first fusion study.
    """
    from .synth import DEFAULT_SUITE_BASE
    base = base if base is not None else DEFAULT_SUITE_BASE
    profiles = tuple(profiles) if profiles is not None else MULTIMODAL_PROFILES
    solver_cfg = solver_config if solver_config is not None else SolverConfig()
    count = len(profiles)
    single_scores: dict[int, list[float]] = {k: [] for k in range(count)}
    baseline_scores: dict[tuple[tuple[int, ...], str], list[float]] = {}
    suites = []
    for t in range(trials):
        suite = multimodal_suite(derive_seed(base_seed, t), base=base, profiles=profiles)
        suites.append(suite)
        truth_pairs = _truth_pairs(suite[0][1])
        for k in range(count):
            sub, truth = suite[k + 1]
            result = solve(sub, replace(solver_cfg, rng_seed=derive_seed(base_seed, t, k)))
            f1 = pair_metrics(result.assignment.pair_set(), truth_pairs).f1
            single_scores[k].append(f1)
    order = sorted(range(count), key=lambda k: (-float(np.mean(single_scores[k])), k))
    subsets = [(k,) for k in range(count)]
    subsets += [tuple(order[:size]) for size in range(2, count + 1)]
    rows: list[AblationRow] = []
    for subset in subsets:
        solver_f1s, ap_f1s, cs_f1s = [], [], []
        for t, suite in enumerate(suites):
            fused, truth = suite[0]
            truth_pairs = _truth_pairs(truth)
            sub = restrict_modalities(fused, subset)
            if len(subset) == 1:
                solver_f1s.append(single_scores[subset[0]][t])
            else:
                result = solve(sub, replace(
                    solver_cfg, rng_seed=derive_seed(base_seed, t, *subset)))
                solver_f1s.append(
                    pair_metrics(result.assignment.pair_set(), truth_pairs).f1)
            ap_f1s.append(pair_metrics(all_pairs_matches(sub), truth_pairs).f1)
            cs_f1s.append(pair_metrics(consecutive_matches(sub), truth_pairs).f1)
        rows.append(AblationRow(subset, "solver", float(np.mean(solver_f1s))))
        rows.append(AblationRow(subset, "all_pairs", float(np.mean(ap_f1s))))
        rows.append(AblationRow(subset, "consecutive", float(np.mean(cs_f1s))))
    return rows


def write_gap_csv(rows: Sequence[TrialRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(GAP_CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.outliers, row.gap_mean, row.gap_std,
                             row.dp_mean, row.dp_std, row.dr_mean, row.dr_std,
                             row.runtime_ms])


def format_gap_table(rows: Sequence[TrialRow]) -> str:
    lines = [f"{'n_o':>4}  {'gap %':>14}  {'dP %':>14}  {'dR %':>14}  {'ms':>8}"]
    for row in rows:
        lines.append(
            f"{row.outliers:>4}  "
            f"{row.gap_mean:7.3f}+-{row.gap_std:5.3f}  "
            f"{row.dp_mean:7.3f}+-{row.dp_std:5.3f}  "
            f"{row.dr_mean:7.3f}+-{row.dr_std:5.3f}  "
            f"{row.runtime_ms:8.1f}")
    return "\n".join(lines)


def write_ablation_csv(rows: Sequence[AblationRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("modalities", "method", "f1_mean"))
        for row in rows:
            writer.writerow(["+".join(str(k) for k in row.modalities),
                             row.method, row.f1_mean])


def format_ablation_table(rows: Sequence[AblationRow]) -> str:
    lines = [f"{'modalities':<12} {'method':<12} {'mean F1':>8}"]
    for row in rows:
        subset = "+".join(str(k) for k in row.modalities)
        lines.append(f"{subset:<12} {row.method:<12} {row.f1_mean:8.4f}")
    return "\n".join(lines)
