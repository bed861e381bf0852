"""Graph classifiers: Bayes rule with true or estimated parameters, and
nearest neighbors on induced adjacencies, plus 0-1 loss estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import (
    LabeledGraphDataset,
    induced_subgraph,
    ier_log_likelihood,
    validate_probability_matrix,
    vertex_set,
)


@dataclass(frozen=True)
class PluginModel:
    """Class priors and per-class edge-probability estimates on a vertex set."""

    class_labels: tuple
    priors: np.ndarray
    edge_probabilities: tuple
    clamp: float
    vertices: np.ndarray


@dataclass(frozen=True)
class LossEstimate:
    """Empirical 0-1 loss with its binomial standard error."""

    error: float
    count: int
    predictions: tuple
    standard_error: float


def fit_plugin(dataset, restrict=None, classes=None, clamp=None):
    """Maximum-likelihood priors and per-class edge means.

    Off-diagonal probability estimates are clamped into [clamp, 1 - clamp]
    (default clamp 1/(2m)) so later log-likelihoods stay finite; the
    diagonal stays 0.
    """
    if np.any((dataset.graphs != 0.0) & (dataset.graphs != 1.0)):
        raise ValueError("plug-in fitting needs binary adjacency matrices")
    vertices = vertex_set(
        restrict if restrict is not None else np.arange(dataset.n), dataset.n
    )
    if classes is None:
        class_labels = tuple(np.unique(dataset.labels).tolist())
    else:
        class_labels = tuple(classes)
    if clamp is None:
        clamp = 1.0 / (2.0 * dataset.m)
    sub = dataset.graphs[np.ix_(np.arange(dataset.m), vertices, vertices)]
    priors = np.empty(len(class_labels))
    edge_probabilities = []
    for i, label in enumerate(class_labels):
        mask = dataset.labels == label
        count = int(mask.sum())
        if count == 0:
            raise ValueError(f"class {label!r} has no training graphs")
        priors[i] = count / dataset.m
        p_hat = np.clip(sub[mask].mean(axis=0), clamp, 1.0 - clamp)
        np.fill_diagonal(p_hat, 0.0)
        edge_probabilities.append(p_hat)
    return PluginModel(
        class_labels=class_labels,
        priors=priors,
        edge_probabilities=tuple(edge_probabilities),
        clamp=float(clamp),
        vertices=vertices,
    )


def _decide(class_labels, scores):
    # argmax takes the first maximum, i.e. ties go to the smaller label
    return class_labels[int(np.argmax(scores))]


def plugin_predict(model, a, restrict=None):
    """Most probable class for one adjacency matrix under the fitted model.

    Exact ties resolve toward the smaller class label.
    """
    if restrict is not None:
        requested = vertex_set(restrict, np.asarray(a).shape[0])
        if not np.array_equal(requested, model.vertices):
            raise ValueError("model was fitted on a different vertex set")
    sub = induced_subgraph(a, model.vertices)
    scores = [
        np.log(model.priors[i]) + ier_log_likelihood(sub, model.edge_probabilities[i])
        for i in range(len(model.class_labels))
    ]
    return _decide(model.class_labels, scores)


def bayes_predict(priors, edge_probabilities, a, class_labels=None):
    """Bayes rule with the true generating parameters (simulation only)."""
    priors = np.asarray(priors, dtype=float)
    mats = [validate_probability_matrix(p) for p in edge_probabilities]
    if priors.shape != (len(mats),):
        raise ValueError("need one prior per class")
    if class_labels is None:
        class_labels = tuple(range(len(mats)))
    with np.errstate(divide="ignore"):
        log_priors = np.log(priors)
    scores = [
        log_priors[i] + ier_log_likelihood(a, mats[i]) for i in range(len(mats))
    ]
    return _decide(tuple(class_labels), scores)


def _batch_log_posteriors(graphs, vertices, priors, restricted_ps):
    """(N, classes) unnormalized log posteriors.

    ``restricted_ps`` are probability matrices already on the ``vertices``
    set with off-diagonal entries strictly inside (0, 1).
    """
    vertices = np.asarray(vertices, dtype=int)
    iu = np.triu_indices(vertices.size, 1)
    sub = graphs[np.ix_(np.arange(graphs.shape[0]), vertices, vertices)]
    flat = sub[:, iu[0], iu[1]]
    log_p = np.stack([np.log(p[iu]) for p in restricted_ps])
    log_1p = np.stack([np.log1p(-p[iu]) for p in restricted_ps])
    return np.log(priors) + flat @ log_p.T + (1.0 - flat) @ log_1p.T


def plugin_predict_many(model, graphs):
    """plugin_predict over an (N, n, n) stack of adjacencies."""
    graphs = np.asarray(graphs, dtype=float)
    off_diag = ~np.eye(model.vertices.size, dtype=bool)
    interior = all(
        np.all((p[off_diag] > 0.0) & (p[off_diag] < 1.0))
        for p in model.edge_probabilities
    )
    if not interior:  # an unclamped model can hold saturated estimates
        return np.asarray([plugin_predict(model, a) for a in graphs])
    scores = _batch_log_posteriors(
        graphs, model.vertices, model.priors, model.edge_probabilities
    )
    picks = np.argmax(scores, axis=1)
    return np.asarray([model.class_labels[i] for i in picks])


def bayes_predict_many(priors, edge_probabilities, graphs, class_labels=None):
    """bayes_predict over an (N, n, n) stack; falls back to the scalar rule
    when a probability sits exactly at 0 or 1."""
    graphs = np.asarray(graphs, dtype=float)
    mats = [validate_probability_matrix(p) for p in edge_probabilities]
    if any(p.shape != graphs.shape[1:] for p in mats):
        raise ValueError("probability matrices must match the adjacency shape")
    if class_labels is None:
        class_labels = tuple(range(len(mats)))
    off_diag = ~np.eye(graphs.shape[1], dtype=bool)
    interior = all(np.all((p[off_diag] > 0.0) & (p[off_diag] < 1.0)) for p in mats)
    if not interior:
        return np.asarray(
            [bayes_predict(priors, mats, a, class_labels) for a in graphs]
        )
    scores = _batch_log_posteriors(
        graphs, np.arange(graphs.shape[1]), np.asarray(priors, dtype=float), mats
    )
    picks = np.argmax(scores, axis=1)
    return np.asarray([class_labels[i] for i in picks])


def knn_predict(train, a, k, restrict=None):
    """Majority vote among the k nearest training graphs.

    Distance is the Frobenius norm between induced adjacencies; distance
    ties resolve by training position, vote ties by the smaller label.
    """
    if not isinstance(train, LabeledGraphDataset):
        raise ValueError("train must be a LabeledGraphDataset")
    if not 1 <= k <= train.m:
        raise ValueError(f"k must lie in [1, {train.m}]")
    vertices = vertex_set(
        restrict if restrict is not None else np.arange(train.n), train.n
    )
    target = induced_subgraph(a, vertices)
    pool = train.graphs[np.ix_(np.arange(train.m), vertices, vertices)]
    dists = np.sqrt(((pool - target) ** 2).sum(axis=(1, 2)))
    nearest = np.argsort(dists, kind="stable")[:k]
    votes = train.labels[nearest]
    candidates = np.unique(votes)
    counts = np.asarray([(votes == c).sum() for c in candidates])
    return candidates[int(np.argmax(counts))].item()


def estimate_loss(predict, dataset):
    """Empirical 0-1 loss of ``predict`` (adjacency -> label) on a dataset."""
    predictions = [predict(a) for a in dataset.graphs]
    return loss_from_predictions(predictions, dataset.labels)


def loss_from_predictions(predictions, truths):
    """Misclassification rate with binomial standard error."""
    predictions = list(predictions)
    truths = np.asarray(truths)
    if len(predictions) != truths.shape[0] or not predictions:
        raise ValueError("need one prediction per evaluation instance")
    wrong = sum(1 for p, t in zip(predictions, truths) if p != t)
    n = len(predictions)
    error = wrong / n
    return LossEstimate(
        error=error,
        count=n,
        predictions=tuple(predictions),
        standard_error=float(np.sqrt(error * (1.0 - error) / n)),
    )
