"""Evaluation harnesses.

ROC/AUC of vertex rankings against a ground-truth signal set, false
positive rates at a fixed selection size, leave-one-out / leave-one-subject-
out pipelines, and seeded replication of the two simulation experiments
(two-class and three-class planted-block populations).
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import classify, corr, screen
from .graph import LabeledGraphDataset, sample_ier_dataset, vertex_set

# planted-block population: n vertices, the first SIGNAL_SIZE of which carry
# a class-dependent edge probability; everything else is class-independent
GRAPH_SIZE = 200
SIGNAL_SIZE = 20
BACKGROUND_P = 0.3
CROSS_P = 0.2
EXPERIMENT_CLASS_P = {
    "exp1": (0.3, 0.4),
    "exp2": (0.3, 0.4, 0.5),
}

DEFAULT_EXP1_M = 100
DEFAULT_EXP2_M_GRID = (60, 150, 300, 600)
DEFAULT_EXP1_METHODS = ("dcorr", "itdcorr-0.5", "rv", "cca")
DEFAULT_EXP2_METHODS = ("bayes", "full", "true-signal", "dcorr", "itdcorr-0.5")


@dataclass(frozen=True)
class RocCurve:
    """Prefix-sweep operating points; starts at (0, 0), ends at (1, 1)."""

    fpr: np.ndarray
    tpr: np.ndarray


@dataclass(frozen=True)
class PipelineConfig:
    """Screening + classifier configuration for cross-validated runs.

    ``fixed_vertices`` bypasses screening entirely. ``size_rule`` is one of
    maxcorr (the screening's own selection), gap, or fixed (top ``size`` of
    the vertex ranking).
    """

    statistic: str = "dcorr"
    iterative: bool = True
    delta: float = 0.5
    threshold: float = 0.0
    size_rule: str = "maxcorr"
    size: int | None = None
    fixed_vertices: tuple | None = None
    classifier: str = "plugin"
    k: int = 11


@dataclass(frozen=True)
class FoldRecord:
    fold: int
    test_indices: tuple
    selected: tuple
    predictions: tuple
    truths: tuple
    unseen_class: bool


@dataclass(frozen=True)
class CrossValReport:
    folds: tuple
    loss: classify.LossEstimate


@dataclass
class EvalReport:
    """Per-repeat records of one experiment replication.

    Record layouts: auc (method, repeat, auc); loss (method, m, repeat,
    error); fpr (method, m, repeat, fpr); roc (method, fpr, tpr) from the
    first repeat; screening (vertex, score, rank, selected) from the first
    method's first repeat.
    """

    experiment: str
    seed: int
    repeats: int
    methods: tuple
    auc_records: list = field(default_factory=list)
    loss_records: list = field(default_factory=list)
    fpr_records: list = field(default_factory=list)
    roc_points: list = field(default_factory=list)
    screening_rows: list = field(default_factory=list)


def roc_auc(ranking, true_set, n):
    """ROC curve and area from a total vertex ranking.

    Sweeps prefixes of the ranking; TPR counts recovered signal vertices,
    FPR counts selected noise vertices. The trapezoid area equals the
    Mann-Whitney statistic of the ranking.
    """
    ranking = np.asarray(ranking, dtype=int)
    if ranking.shape != (n,) or not np.array_equal(np.sort(ranking), np.arange(n)):
        raise ValueError("ranking must be a permutation of range(n)")
    true = vertex_set(true_set, n)
    if true.size >= n:
        raise ValueError("true signal set must be a proper subset of the vertices")
    member = np.zeros(n, dtype=bool)
    member[true] = True
    hits = member[ranking]
    tp = np.concatenate(([0], np.cumsum(hits)))
    fp = np.concatenate(([0], np.cumsum(~hits)))
    curve = RocCurve(fpr=fp / (n - true.size), tpr=tp / true.size)
    # trapezoid rule on the integer counts, normalized once: exact at the
    # endpoints and identical to the Mann-Whitney statistic
    area = float(np.trapezoid(tp, fp))
    return curve, area / (true.size * (n - true.size))


def fpr_at_size(selected, true_set, n):
    """Fraction of non-signal vertices inside a selected set."""
    true = vertex_set(true_set, n)
    if true.size >= n:
        raise ValueError("true signal set must be a proper subset of the vertices")
    selected = np.asarray(selected, dtype=int)
    if selected.size == 0:
        return 0.0
    selected = vertex_set(selected, n)
    false_positives = np.setdiff1d(selected, true).size
    return false_positives / (n - true.size)


def _screen_and_select(dataset, config, threads=1):
    if config.fixed_vertices is not None:
        return vertex_set(config.fixed_vertices, dataset.n), None
    if config.iterative:
        result = screen.screen_iterative(
            dataset, delta=config.delta, statistic=config.statistic, threads=threads
        )
    else:
        result = screen.screen_once(
            dataset, config.threshold, statistic=config.statistic, threads=threads
        )
    selected = screen.select_vertices(result, config.size_rule, config.size)
    if selected.size == 0:
        raise ValueError("screening selected no vertices; lower the threshold")
    return selected, result


def _folds(dataset, grouping):
    if grouping == "none":
        return [np.array([i]) for i in range(dataset.m)]
    if grouping == "subject":
        if dataset.subject_ids is None:
            raise ValueError("grouping by subject needs subject ids")
        order = {}
        for i, subject in enumerate(dataset.subject_ids):
            order.setdefault(subject, []).append(i)
        return [np.asarray(v) for v in order.values()]
    raise ValueError(f"unknown grouping {grouping!r}")


def cross_validate(dataset, pipeline, grouping="none", threads=1):
    """Leave-one-graph-out or leave-one-subject-out screening + prediction.

    Screening and fitting see only the training remainder of each fold, so
    held-out labels can never leak into vertex selection. Folds whose true
    class is absent from training are flagged; their predictions count as
    errors by construction.
    """
    folds = _folds(dataset, grouping)
    records = []
    all_predictions = []
    all_truths = []
    for fold_id, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(dataset.m), test_idx)
        train = dataset.subset(train_idx)
        selected, _ = _screen_and_select(train, pipeline, threads=threads)
        train_classes = set(np.unique(train.labels).tolist())
        unseen = any(
            dataset.labels[i].item() not in train_classes for i in test_idx
        )
        if pipeline.classifier == "plugin":
            model = classify.fit_plugin(train, restrict=selected)
            predictions = [
                classify.plugin_predict(model, dataset.graphs[i]) for i in test_idx
            ]
        elif pipeline.classifier == "knn":
            predictions = [
                classify.knn_predict(train, dataset.graphs[i], pipeline.k, selected)
                for i in test_idx
            ]
        else:
            raise ValueError(f"unknown classifier {pipeline.classifier!r}")
        truths = [dataset.labels[i].item() for i in test_idx]
        records.append(
            FoldRecord(
                fold=fold_id,
                test_indices=tuple(int(i) for i in test_idx),
                selected=tuple(int(v) for v in selected),
                predictions=tuple(predictions),
                truths=tuple(truths),
                unseen_class=unseen,
            )
        )
        all_predictions.extend(predictions)
        all_truths.extend(truths)
    loss = classify.loss_from_predictions(all_predictions, np.asarray(all_truths))
    return CrossValReport(folds=tuple(records), loss=loss)


def experiment_parameters(name):
    """Per-class edge-probability matrices, class priors, and the signal set."""
    if name not in EXPERIMENT_CLASS_P:
        raise ValueError(f"unknown experiment {name!r}; expected one of {tuple(EXPERIMENT_CLASS_P)}")
    mats = []
    for p_signal in EXPERIMENT_CLASS_P[name]:
        p = np.full((GRAPH_SIZE, GRAPH_SIZE), BACKGROUND_P)
        p[:SIGNAL_SIZE, :] = CROSS_P
        p[:, :SIGNAL_SIZE] = CROSS_P
        p[:SIGNAL_SIZE, :SIGNAL_SIZE] = p_signal
        np.fill_diagonal(p, 0.0)
        mats.append(p)
    priors = np.full(len(mats), 1.0 / len(mats))
    return mats, priors, np.arange(SIGNAL_SIZE)


def sample_experiment(name, m, rng):
    """One dataset draw from a named generator plus its true signal set."""
    mats, priors, signal = experiment_parameters(name)
    return sample_ier_dataset(mats, priors, m, rng), signal


def parse_method(name):
    """Screening method names: a statistic for one-shot, it<stat>-<delta>
    for iterative (e.g. itdcorr-0.5)."""
    statistic, iterative, delta = name, False, None
    if name.startswith("it"):
        statistic, _, tail = name[2:].partition("-")
        iterative = True
        delta = float(tail) if tail else 0.5
    if statistic not in corr.STATISTICS:
        raise ValueError(f"unknown screening method {name!r}")
    return statistic, iterative, delta


def _repeat_seed(base, index):
    return int(base) ^ int(index)


def _screen_method(dataset, method, threads):
    statistic, iterative, delta = parse_method(method)
    if iterative:
        return screen.screen_iterative(dataset, delta=delta, statistic=statistic, threads=threads)
    return screen.screen_once(dataset, 0.0, statistic=statistic, threads=threads)


def _record_screening(report, result, selected):
    ranking = screen.vertex_ranking(result)
    rank_of = np.empty_like(ranking)
    rank_of[ranking] = np.arange(1, ranking.size + 1)
    chosen = np.zeros(ranking.size, dtype=bool)
    chosen[np.asarray(selected, dtype=int)] = True
    for v in range(ranking.size):
        report.screening_rows.append(
            (v, float(result.scores[v]), int(rank_of[v]), int(chosen[v]))
        )


def run_experiment(
    name,
    repeats,
    seed=0,
    m=None,
    m_grid=None,
    methods=None,
    test_draws=500,
    threads=1,
):
    """Replicate a simulation experiment over seeded repeats.

    exp1 scores vertex rankings (AUC against the planted signal set) for
    each screening method at a single m. exp2 trains the classifiers at
    each m in the grid, records Monte-Carlo 0-1 losses on fresh test draws,
    and the screening false positive rate at the planted size. The repeat
    with index i uses seed ``seed XOR i`` (globally indexed across the m
    grid), so reports are reproducible.
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    if name == "exp1":
        methods = tuple(methods) if methods else DEFAULT_EXP1_METHODS
        report = EvalReport("exp1", int(seed), int(repeats), methods)
        m = m or DEFAULT_EXP1_M
        for repeat in range(repeats):
            dataset, signal = sample_experiment("exp1", m, _repeat_seed(seed, repeat))
            for method in methods:
                result = _screen_method(dataset, method, threads)
                ranking = screen.vertex_ranking(result)
                curve, auc = roc_auc(ranking, signal, dataset.n)
                report.auc_records.append((method, repeat, auc))
                if repeat == 0:
                    report.roc_points.extend(
                        (method, float(f), float(t)) for f, t in zip(curve.fpr, curve.tpr)
                    )
                    if method == methods[0]:
                        selected = screen.select_vertices(result, "fixed", SIGNAL_SIZE)
                        _record_screening(report, result, selected)
        return report
    if name == "exp2":
        methods = tuple(methods) if methods else DEFAULT_EXP2_METHODS
        grid = tuple(m_grid) if m_grid else ((m,) if m else DEFAULT_EXP2_M_GRID)
        report = EvalReport("exp2", int(seed), int(repeats), methods)
        params, priors, signal = experiment_parameters("exp2")
        for m_index, m_value in enumerate(grid):
            if m_value < len(params):
                raise ValueError("m too small to cover every class")
            for repeat in range(repeats):
                rng = np.random.default_rng(
                    _repeat_seed(seed, m_index * repeats + repeat)
                )
                train, _ = sample_experiment("exp2", m_value, rng)
                test, _ = sample_experiment("exp2", test_draws, rng)
                for method in methods:
                    predictions, fpr = _exp2_method(
                        method, train, test, params, priors, signal, threads
                    )
                    error = float(np.mean(predictions != test.labels))
                    report.loss_records.append((method, m_value, repeat, error))
                    if fpr is not None:
                        report.fpr_records.append((method, m_value, repeat, fpr))
        return report
    raise ValueError(f"unknown experiment {name!r}")


def _exp2_method(method, train, test, params, priors, signal, threads):
    """Predictions on the test stack plus the screening FPR when relevant."""
    if method == "bayes":
        return classify.bayes_predict_many(priors, params, test.graphs), None
    if method == "full":
        model = classify.fit_plugin(train)
        return classify.plugin_predict_many(model, test.graphs), None
    if method == "true-signal":
        model = classify.fit_plugin(train, restrict=signal)
        return classify.plugin_predict_many(model, test.graphs), None
    result = _screen_method(train, method, threads)
    selected = screen.select_vertices(result, "fixed", signal.size)
    model = classify.fit_plugin(train, restrict=selected)
    fpr = fpr_at_size(selected, signal, train.n)
    return classify.plugin_predict_many(model, test.graphs), fpr


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(values.mean())
    se = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else None
    return mean, se


def summarize_auc(report):
    """(method, mean_auc, se) rows in method order."""
    rows = []
    for method in report.methods:
        values = [a for meth, _, a in report.auc_records if meth == method]
        if values:
            rows.append((method, *_mean_se(values)))
    return rows


def summarize_loss(report):
    """(method, m, mean_error, se) rows grouped by method then m."""
    rows = []
    grid = sorted({m for _, m, _, _ in report.loss_records})
    for method in report.methods:
        for m in grid:
            values = [
                e for meth, mm, _, e in report.loss_records if meth == method and mm == m
            ]
            if values:
                rows.append((method, m, *_mean_se(values)))
    return rows


def summarize_fpr(report):
    """(method, m, mean_fpr, se) rows for the screening methods."""
    rows = []
    grid = sorted({m for _, m, _, _ in report.fpr_records})
    for method in report.methods:
        for m in grid:
            values = [
                f for meth, mm, _, f in report.fpr_records if meth == method and mm == m
            ]
            if values:
                rows.append((method, m, *_mean_se(values)))
    return rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(x) for x in row])


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def write_report(report, out_dir):
    """Write the report CSVs (auc.csv, loss.csv, roc.csv, screening.csv,
    fpr.csv, summary.csv) for whatever records the experiment produced."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if report.auc_records:
        _write_csv(
            os.path.join(out_dir, "auc.csv"), ["method", "repeat", "auc"], report.auc_records
        )
        _write_csv(
            os.path.join(out_dir, "summary.csv"),
            ["method", "mean_auc", "se"],
            summarize_auc(report),
        )
        written += ["auc.csv", "summary.csv"]
    if report.loss_records:
        _write_csv(
            os.path.join(out_dir, "loss.csv"),
            ["method", "m", "repeat", "error"],
            report.loss_records,
        )
        _write_csv(
            os.path.join(out_dir, "summary.csv"),
            ["method", "m", "mean_error", "se"],
            summarize_loss(report),
        )
        written += ["loss.csv", "summary.csv"]
    if report.fpr_records:
        _write_csv(
            os.path.join(out_dir, "fpr.csv"),
            ["method", "m", "repeat", "fpr"],
            report.fpr_records,
        )
        written.append("fpr.csv")
    if report.roc_points:
        _write_csv(
            os.path.join(out_dir, "roc.csv"), ["method", "fpr", "tpr"], report.roc_points
        )
        written.append("roc.csv")
    if report.screening_rows:
        _write_csv(
            os.path.join(out_dir, "screening.csv"),
            ["vertex", "score", "rank", "selected"],
            report.screening_rows,
        )
        written.append("screening.csv")
    return written


def summary_text(report):
    """Aligned text summary, one row per method (and per m for exp2)."""
    lines = []
    if report.auc_records:
        lines.append(f"{'method':<16}{'mean AUC':>12}{'se':>12}")
        for method, mean, se in summarize_auc(report):
            lines.append(f"{method:<16}{mean:>12.4f}{_fmt_se(se):>12}")
    if report.loss_records:
        lines.append(f"{'method':<16}{'m':>6}{'mean error':>12}{'se':>12}")
        for method, m, mean, se in summarize_loss(report):
            lines.append(f"{method:<16}{m:>6}{mean:>12.4f}{_fmt_se(se):>12}")
    if report.fpr_records:
        lines.append("")
        lines.append(f"{'method':<16}{'m':>6}{'mean FPR':>12}{'se':>12}")
        for method, m, mean, se in summarize_fpr(report):
            lines.append(f"{method:<16}{m:>6}{mean:>12.4f}{_fmt_se(se):>12}")
    return "\n".join(lines)


def _fmt_se(se):
    return "-" if se is None else f"{se:.4f}"
