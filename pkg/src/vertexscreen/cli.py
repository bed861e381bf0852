"""Command-line interface.

Subcommands: ``simulate`` (write a generator draw as CSV), ``screen``
(one-shot or iterative vertex screening of a dataset), ``classify``
(cross-validated screening + prediction), ``replicate`` (seeded experiment
replication with report CSVs).

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import classify, evaluate, screen
from .graph import load_dataset, save_dataset


class CliError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# config-file keys and their parsers; flags use the same names with dashes
_CONVERTERS = {
    "graphs": str,
    "labels": str,
    "n": int,
    "stat": str,
    "iterative": lambda s: s.lower() in ("1", "true", "yes"),
    "delta": float,
    "threshold": float,
    "size": int,
    "size-rule": str,
    "classifier": str,
    "k": int,
    "group": str,
    "repeats": int,
    "seed": int,
    "threads": int,
    "out": str,
    "m": int,
    "m-grid": str,
    "test-draws": int,
    "methods": str,
    "experiment": str,
}


def build_parser():
    parser = _Parser(prog="vertexscreen", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value file; explicit flags win")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("simulate", help="write a generator draw as graphs.csv/labels.csv")
    p.add_argument("experiment", choices=("exp1", "exp2"))
    p.add_argument("--m", type=int, default=None)
    add_common(p)

    def add_dataset(p):
        p.add_argument("--graphs", default=None)
        p.add_argument("--labels", default=None)
        p.add_argument("--n", type=int, default=None)

    def add_screening(p):
        p.add_argument("--stat", choices=("dcorr", "mgc", "rv", "cca"), default=None)
        p.add_argument("--iterative", action="store_true", default=None)
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--size", type=int, default=None)
        p.add_argument("--size-rule", choices=("maxcorr", "gap", "fixed"), default=None)

    p = sub.add_parser("screen", help="score and select vertices")
    add_dataset(p)
    add_screening(p)
    add_common(p)

    p = sub.add_parser("classify", help="cross-validated screening + prediction")
    add_dataset(p)
    add_screening(p)
    p.add_argument("--classifier", choices=("plugin", "knn", "bayes"), default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--group", choices=("none", "subject"), default=None)
    p.add_argument("--experiment", choices=("exp1", "exp2"), default=None,
                   help="generator supplying the true parameters for --classifier bayes")
    add_common(p)

    p = sub.add_parser("replicate", help="replicate a simulation experiment")
    p.add_argument("experiment", choices=("exp1", "exp2"))
    p.add_argument("--repeats", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--m-grid", default=None, help="comma-separated training sizes (exp2)")
    p.add_argument("--test-draws", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma-separated method names")
    add_common(p)

    return parser


def _apply_config(args):
    """Fill unset options from the --config key=value file."""
    if not getattr(args, "config", None):
        return args
    values = {}
    with open(args.config) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CliError(f"{args.config}:{line_no}: expected key=value")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _CONVERTERS:
                raise CliError(f"{args.config}:{line_no}: unknown option {key!r}")
            try:
                values[key] = _CONVERTERS[key](raw.strip())
            except ValueError:
                raise CliError(f"{args.config}:{line_no}: bad value for {key!r}") from None
    for key, value in values.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None and hasattr(args, attr):
            setattr(args, attr, value)
    return args


def _default(value, fallback):
    return fallback if value is None else value


def _require(value, name):
    if value is None:
        raise CliError(f"--{name} is required")
    return value


@dataclass(frozen=True)
class ScreeningOptions:
    statistic: str
    iterative: bool
    delta: float
    threshold: float
    size_rule: str
    size: int | None


def _screening_options(args):
    size = args.size
    rule = args.size_rule
    if size is not None:
        if rule is not None and rule != "fixed":
            raise CliError("--size implies --size-rule fixed")
        rule = "fixed"
    elif rule == "fixed":
        raise CliError("--size-rule fixed needs --size")
    elif rule is None:
        rule = "maxcorr"
    delta = _default(args.delta, 0.5)
    if not 0.0 < delta < 1.0:
        raise CliError("--delta must lie in (0, 1)")
    threshold = _default(args.threshold, 0.0)
    if not 0.0 <= threshold <= 1.0:
        raise CliError("--threshold must lie in [0, 1]")
    return ScreeningOptions(
        statistic=_default(args.stat, "dcorr"),
        iterative=bool(_default(args.iterative, False)),
        delta=delta,
        threshold=threshold,
        size_rule=rule,
        size=size,
    )


def _load(args):
    return load_dataset(
        _require(args.graphs, "graphs"), _require(args.labels, "labels"), n=args.n
    )


def _out_dir(args):
    out = _default(args.out, ".")
    os.makedirs(out, exist_ok=True)
    return out


def cmd_simulate(args):
    m = _require(args.m, "m")
    if m < 2:
        raise CliError("--m must be at least 2")
    seed = _default(args.seed, 0)
    dataset, _ = evaluate.sample_experiment(args.experiment, m, seed)
    out = _out_dir(args)
    graphs_path = os.path.join(out, "graphs.csv")
    labels_path = os.path.join(out, "labels.csv")
    save_dataset(dataset, graphs_path, labels_path)
    print(f"wrote {graphs_path} and {labels_path} "
          f"({dataset.m} graphs, {dataset.n} vertices, seed {seed})")
    return 0


def cmd_screen(args):
    dataset = _load(args)
    opts = _screening_options(args)
    threads = _default(args.threads, 1)
    if opts.iterative:
        result = screen.screen_iterative(
            dataset, delta=opts.delta, statistic=opts.statistic, threads=threads
        )
    else:
        result = screen.screen_once(
            dataset, opts.threshold, statistic=opts.statistic, threads=threads
        )
    selected = screen.select_vertices(result, opts.size_rule, opts.size)
    ranking = screen.vertex_ranking(result)
    rank_of = np.empty(dataset.n, dtype=int)
    rank_of[ranking] = np.arange(1, dataset.n + 1)
    chosen = np.zeros(dataset.n, dtype=bool)
    chosen[selected] = True

    out = _out_dir(args)
    path = os.path.join(out, "screening.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex", "score", "rank", "elimination_level", "selected"])
        for v in range(dataset.n):
            level = result.elimination_order[v]
            writer.writerow(
                [
                    v,
                    repr(float(result.scores[v])),
                    int(rank_of[v]),
                    "" if np.isinf(level) else int(level),
                    int(chosen[v]),
                ]
            )
    names = dataset.vertex_names or tuple(str(v) for v in range(dataset.n))
    print(f"selected {selected.size} vertices: " + " ".join(names[v] for v in selected))
    print(f"wrote {path}")
    return 0


def cmd_classify(args):
    dataset = _load(args)
    classifier = _default(args.classifier, "plugin")
    grouping = _default(args.group, "none")
    out = _out_dir(args)
    path = os.path.join(out, "loss.csv")

    if classifier == "bayes":
        if args.experiment is None:
            raise CliError("--classifier bayes needs --experiment for the true parameters")
        params, priors, _ = evaluate.experiment_parameters(args.experiment)
        if params[0].shape[0] != dataset.n:
            raise CliError(
                f"dataset has {dataset.n} vertices but {args.experiment} expects {params[0].shape[0]}"
            )
        predictions = classify.bayes_predict_many(priors, params, dataset.graphs)
        loss = classify.loss_from_predictions(predictions, dataset.labels)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["fold", "graph_id", "label", "prediction", "unseen_class"])
            for i in range(dataset.m):
                writer.writerow([i, i, dataset.labels[i], predictions[i], 0])
        print(f"classifier=bayes error={loss.error:.4f} se={loss.standard_error:.4f} "
              f"({loss.count} instances)")
        print(f"wrote {path}")
        return 0

    if grouping == "subject" and dataset.subject_ids is None:
        raise CliError("--group subject needs a subject_id column in labels.csv")
    opts = _screening_options(args)
    k = _default(args.k, 11)
    if k < 1:
        raise CliError("--k must be at least 1")
    pipeline = evaluate.PipelineConfig(
        statistic=opts.statistic,
        iterative=opts.iterative,
        delta=opts.delta,
        threshold=opts.threshold,
        size_rule=opts.size_rule,
        size=opts.size,
        classifier=classifier,
        k=k,
    )
    report = evaluate.cross_validate(
        dataset, pipeline, grouping=grouping, threads=_default(args.threads, 1)
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "graph_id", "label", "prediction", "unseen_class"])
        for fold in report.folds:
            for gid, truth, pred in zip(fold.test_indices, fold.truths, fold.predictions):
                writer.writerow([fold.fold, gid, truth, pred, int(fold.unseen_class)])
    print(f"classifier={classifier} folds={len(report.folds)} "
          f"error={report.loss.error:.4f} se={report.loss.standard_error:.4f}")
    print(f"wrote {path}")
    return 0


def cmd_replicate(args):
    repeats = _default(args.repeats, 50)
    if repeats < 1:
        raise CliError("--repeats must be at least 1")
    m_grid = None
    if args.m_grid:
        try:
            m_grid = tuple(int(x) for x in args.m_grid.split(","))
        except ValueError:
            raise CliError("--m-grid expects comma-separated integers") from None
    methods = tuple(args.methods.split(",")) if args.methods else None
    report = evaluate.run_experiment(
        args.experiment,
        repeats=repeats,
        seed=_default(args.seed, 0),
        m=args.m,
        m_grid=m_grid,
        methods=methods,
        test_draws=_default(args.test_draws, 500),
        threads=_default(args.threads, 1),
    )
    out = _out_dir(args)
    written = evaluate.write_report(report, out)
    print(evaluate.summary_text(report))
    print(f"wrote {', '.join(written)} to {out}")
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "screen": cmd_screen,
    "classify": cmd_classify,
    "replicate": cmd_replicate,
}


def main(argv=None):
    try:
        args = _apply_config(build_parser().parse_args(argv))
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
