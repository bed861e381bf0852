"""One-shot and iterative vertex screening.

Each vertex is scored by the dependence between its adjacency-row feature
(within the current induced subgraph) and the labels. One-shot screening
thresholds the scores once; iterative screening repeatedly drops the
delta-quantile tail and keeps the level whose whole-subgraph statistic with
the labels is largest.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import corr
from .graph import vertex_set

# elimination_order entry for vertices that were never eliminated
SURVIVOR = np.inf

# memory cap for the vectorized dcorr path: vertices per chunk scale with 1/m^2
_CHUNK_CELLS = 2**23


@dataclass(frozen=True)
class ScreeningResult:
    """Outcome of a screening run over the full vertex set.

    ``scores`` holds the last-computed statistic per vertex (at elimination
    time for dropped vertices). ``levels`` pairs each nested vertex set with
    its whole-subgraph correlation; one-shot results carry a single level
    with NaN correlation since no level comparison happens.
    """

    method: str
    statistic: str
    scores: np.ndarray
    elimination_order: np.ndarray
    levels: tuple
    selected: np.ndarray
    threshold: float | None = None
    delta: float | None = None


def _features_tensor(dataset, restrict):
    sub = dataset.graphs[np.ix_(np.arange(dataset.m), restrict, restrict)]
    # feature of the i-th restricted vertex is row i of each induced adjacency
    return sub.transpose(1, 0, 2)


def _dcorr_scores(features, labels):
    """Vectorized dcorr of many feature blocks against one label vector.

    Matches corr.dcorr(features[i], labels, y_metric="discrete") for each
    block up to roundoff.
    """
    n_blocks, m, _ = features.shape
    cy = corr.double_center(corr.pairwise_distances(labels, "discrete"))
    vy = float(np.mean(cy * cy))
    scores = np.zeros(n_blocks)
    if vy <= corr.DEGENERATE_TOL:
        return scores
    diag = np.arange(m)
    chunk = max(1, _CHUNK_CELLS // (m * m))
    for start in range(0, n_blocks, chunk):
        block = np.ascontiguousarray(features[start : start + chunk])
        sq = np.einsum("uij,uij->ui", block, block)
        d2 = sq[:, :, None] + sq[:, None, :] - 2.0 * (block @ block.transpose(0, 2, 1))
        d2 = 0.5 * (d2 + d2.transpose(0, 2, 1))
        np.maximum(d2, 0.0, out=d2)
        dx = np.sqrt(d2)
        dx[:, diag, diag] = 0.0
        cx = (
            dx
            - dx.mean(axis=2, keepdims=True)
            - dx.mean(axis=1, keepdims=True)
            + dx.mean(axis=(1, 2), keepdims=True)
        )
        vxy = np.maximum(np.mean(cx * cy, axis=(1, 2)), 0.0)
        vx = np.mean(cx * cx, axis=(1, 2))
        ok = vx > corr.DEGENERATE_TOL
        out = np.zeros(len(block))
        out[ok] = np.clip(vxy[ok] / np.sqrt(vx[ok] * vy), 0.0, 1.0)
        scores[start : start + chunk] = out
    return scores


def score_vertices(dataset, restrict=None, statistic="dcorr", threads=1):
    """Per-vertex statistic between adjacency-row features and the labels.

    Features are rows of the induced subgraph on ``restrict`` (the full
    vertex set when omitted); scores align with the sorted restrict indices.
    """
    if statistic not in corr.STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; expected one of {corr.STATISTICS}")
    if restrict is None:
        restrict = np.arange(dataset.n)
    restrict = vertex_set(restrict, dataset.n)
    features = _features_tensor(dataset, restrict)
    if statistic == "dcorr":
        return _dcorr_scores(features, dataset.labels)

    def score_one(i):
        return corr.feature_label_correlation(features[i], dataset.labels, statistic)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.array(list(pool.map(score_one, range(len(restrict)))))
    return np.array([score_one(i) for i in range(len(restrict))])


def subgraph_correlation(dataset, vertices, statistic="dcorr"):
    """Statistic between flattened upper-triangle adjacencies and the labels.

    This is the whole-subgraph signal used to pick the best iterative level.
    """
    idx = vertex_set(vertices, dataset.n)
    iu = np.triu_indices(idx.size, 1)
    if iu[0].size == 0:
        return 0.0
    sub = dataset.graphs[np.ix_(np.arange(dataset.m), idx, idx)]
    features = sub[:, iu[0], iu[1]]
    return corr.feature_label_correlation(features, dataset.labels, statistic)


def screen_once(dataset, threshold, statistic="dcorr", threads=1):
    """Keep the vertices whose score strictly exceeds the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    scores = score_vertices(dataset, None, statistic, threads)
    selected = np.flatnonzero(scores > threshold)
    return ScreeningResult(
        method="once",
        statistic=statistic,
        scores=scores,
        elimination_order=np.full(dataset.n, SURVIVOR),
        levels=((np.arange(dataset.n), float("nan")),),
        selected=selected,
        threshold=float(threshold),
    )


def screen_iterative(dataset, delta=0.5, statistic="dcorr", min_size=1, threads=1):
    """Iterative screening on shrinking induced subgraphs.

    At each level the delta-quantile of the scores is the cut: vertices
    scoring strictly above it survive. When ties or quantile rounding would
    keep everything, nothing, or fewer than ceil((1-delta) * size) vertices,
    the level instead keeps that many top scorers (ties toward the smaller
    vertex index), which guarantees strictly nested levels. The selected set
    is the level with the largest whole-subgraph correlation (ties go to the
    larger subgraph).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if min_size < 1:
        raise ValueError("min_size must be at least 1")
    n = dataset.n
    scores = np.zeros(n)
    elimination = np.full(n, SURVIVOR)
    current = np.arange(n)
    level_sets = [current]
    iteration = 1
    while current.size > min_size:
        level_scores = score_vertices(dataset, current, statistic, threads)
        scores[current] = level_scores
        cut = float(np.quantile(level_scores, delta))
        keep = level_scores > cut
        kept = int(keep.sum())
        target = min(int(np.ceil((1.0 - delta) * current.size)), current.size - 1)
        if kept == 0 or kept >= current.size or kept < target:
            order = np.lexsort((current, -level_scores))
            keep = np.zeros(current.size, dtype=bool)
            keep[order[:target]] = True
        elimination[current[~keep]] = iteration
        current = current[keep]
        level_sets.append(current)
        iteration += 1
    if len(level_sets) == 1:
        scores[current] = score_vertices(dataset, current, statistic, threads)
    level_corrs = [subgraph_correlation(dataset, vs, statistic) for vs in level_sets]
    best = int(np.argmax(level_corrs))
    return ScreeningResult(
        method="iterative",
        statistic=statistic,
        scores=scores,
        elimination_order=elimination,
        levels=tuple(zip(level_sets, level_corrs)),
        selected=level_sets[best],
        delta=float(delta),
    )


def vertex_ranking(result):
    """Total vertex order, best first.

    One-shot: by score, ties by index. Iterative: by elimination depth
    (survivors first), then by the score at elimination time, then index.
    """
    n = result.scores.shape[0]
    idx = np.arange(n)
    if result.method == "once":
        return np.lexsort((idx, -result.scores))
    return np.lexsort((idx, -result.scores, -result.elimination_order))


def select_size_by_gap(scores, vertices=None):
    """Cut the descending score sequence at its largest consecutive drop.

    Returns the vertices above the cut; equal gaps resolve to the earliest
    (largest-score) cut. All-equal scores keep everything and warn.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.size < 2:
        raise ValueError("need at least 2 scores")
    if vertices is None:
        vertices = np.arange(scores.size)
    vertices = np.asarray(vertices, dtype=int)
    order = np.lexsort((vertices, -scores))
    ordered = scores[order]
    gaps = ordered[:-1] - ordered[1:]
    if np.all(gaps == 0):
        warnings.warn("all scores are equal; gap selection keeps every vertex")
        return np.sort(vertices)
    cut = int(np.argmax(gaps))
    return np.sort(vertices[order[: cut + 1]])


def select_vertices(result, rule="maxcorr", size=None):
    """Apply a size-selection rule to a screening result.

    ``maxcorr`` returns the screening's own selection, ``gap`` cuts the
    score sequence at its largest drop, ``fixed`` takes the top ``size``
    of the vertex ranking.
    """
    if rule == "maxcorr":
        return result.selected
    if rule == "gap":
        return select_size_by_gap(result.scores)
    if rule == "fixed":
        n = result.scores.shape[0]
        if size is None or not 1 <= size <= n:
            raise ValueError("fixed-size selection needs a size in [1, n]")
        return np.sort(vertex_ranking(result)[:size])
    raise ValueError(f"unknown size rule {rule!r}")
