"""Dependence statistics between multivariate samples.

Distance-based correlation (global and multiscale/local) plus the RV and
canonical-correlation baselines. Conventions shared by every statistic:
samples are (m, d) matrices with rows as observations (1-d inputs are read
as a single column), returned values lie in [0, 1] after clamping, and
degenerate inputs (a constant X or Y) yield 0.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.stats import rankdata

STATISTICS = ("dcorr", "mgc", "rv", "cca")

# Denominators at or below this are treated as degenerate (constant input).
DEGENERATE_TOL = 1e-14

# Fraction of the (k, l) scale grid a region must exceed before the smoothed
# local maximum replaces the global statistic.
MGC_REGION_FRACTION = 0.02


def _as_sample_matrix(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"expected a 1-d or 2-d sample array, got shape {x.shape}")
    if x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples contain non-finite entries")
    return x


def pairwise_distances(samples, metric="euclidean"):
    """m x m matrix of pairwise distances between rows.

    ``euclidean`` accepts any (m, d) sample matrix; ``discrete`` is the 0/1
    mismatch indicator and only applies to 1-d label vectors.
    """
    if metric == "euclidean":
        x = _as_sample_matrix(samples)
        sq = np.einsum("ij,ij->i", x, x)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
        d2 = 0.5 * (d2 + d2.T)
        np.maximum(d2, 0.0, out=d2)
        d = np.sqrt(d2)
        np.fill_diagonal(d, 0.0)
        return d
    if metric == "discrete":
        y = np.asarray(samples)
        if y.ndim != 1:
            raise ValueError("discrete metric expects a 1-d label vector")
        if y.shape[0] < 2:
            raise ValueError("need at least 2 samples")
        if y.dtype.kind in "fc" and not np.all(np.isfinite(y)):
            raise ValueError("labels contain non-finite entries")
        return (y[:, None] != y[None, :]).astype(float)
    raise ValueError(f"unknown metric {metric!r}")


def double_center(d):
    """Subtract row and column means and add back the grand mean.

    Every row and column of the result sums to zero, which makes the mean
    of an entrywise product of two centered matrices a covariance-like
    quantity.
    """
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    return d - d.mean(axis=1, keepdims=True) - d.mean(axis=0, keepdims=True) + d.mean()


def _centered_pair(x, y, x_metric, y_metric):
    cx = double_center(pairwise_distances(x, x_metric))
    cy = double_center(pairwise_distances(y, y_metric))
    if cx.shape != cy.shape:
        raise ValueError(
            f"sample counts differ: {cx.shape[0]} vs {cy.shape[0]}"
        )
    return cx, cy


def dcov_sq(x, y, x_metric="euclidean", y_metric="euclidean"):
    """Squared-scale distance covariance between two samples.

    Mean of the entrywise product of the double-centered distance matrices
    (the plain V-statistic). Mathematically nonnegative; tiny negative
    roundoff is clamped to 0. Symmetric in its arguments.
    """
    cx, cy = _centered_pair(x, y, x_metric, y_metric)
    return max(float(np.mean(cx * cy)), 0.0)


def _ratio(vxy, vx, vy):
    if vx <= DEGENERATE_TOL or vy <= DEGENERATE_TOL:
        return 0.0
    return float(np.clip(vxy / np.sqrt(vx * vy), 0.0, 1.0))


def dcorr(x, y, x_metric="euclidean", y_metric="euclidean"):
    """Distance correlation: dcov_sq(x, y) / sqrt(dcov_sq(x, x) * dcov_sq(y, y)).

    Lies in [0, 1]; a degenerate (constant) x or y gives 0 by convention.
    """
    cx, cy = _centered_pair(x, y, x_metric, y_metric)
    vxy = max(float(np.mean(cx * cy)), 0.0)
    vx = float(np.mean(cx * cx))
    vy = float(np.mean(cy * cy))
    return _ratio(vxy, vx, vy)


def local_correlation_grid(x, y, x_metric="euclidean", y_metric="euclidean"):
    """Local distance correlations at every neighborhood scale.

    Entry [k-1, l-1] restricts the centered-product sums to sample pairs
    whose distance rank within their row is at most k in x and at most l in
    y (average ranks on ties). The [m-1, m-1] entry uses every pair and
    equals the global dcorr. Cells whose local variances are degenerate are
    set to 0.
    """
    dx = pairwise_distances(x, x_metric)
    dy = pairwise_distances(y, y_metric)
    if dx.shape != dy.shape:
        raise ValueError(f"sample counts differ: {dx.shape[0]} vs {dy.shape[0]}")
    m = dx.shape[0]
    cx = double_center(dx)
    cy = double_center(dy)

    # 1{rank <= k} for integer k is 1{ceil(rank) <= k}, so each pair lands
    # in one bucket of a cumulative-sum grid.
    bx = np.ceil(rankdata(dx, method="average", axis=1)).astype(int) - 1
    by = np.ceil(rankdata(dy, method="average", axis=1)).astype(int) - 1

    cov = np.zeros((m, m))
    np.add.at(cov, (bx, by), cx * cy)
    varx = np.zeros(m)
    np.add.at(varx, bx, cx * cx)
    vary = np.zeros(m)
    np.add.at(vary, by, cy * cy)

    cov = np.cumsum(np.cumsum(cov, axis=0), axis=1)
    varx = np.cumsum(varx)
    vary = np.cumsum(vary)

    grid = np.zeros((m, m))
    ok = (varx[:, None] > DEGENERATE_TOL) & (vary[None, :] > DEGENERATE_TOL)
    denom = np.sqrt(np.outer(np.maximum(varx, 0.0), np.maximum(vary, 0.0)))
    np.divide(cov, denom, out=grid, where=ok)
    return grid


def mgc(x, y, x_metric="euclidean", y_metric="euclidean"):
    """Smoothed maximum of the local distance correlations.

    Among the cells of the scale grid that strictly exceed the global
    statistic, take connected regions (4-connectivity); if the biggest
    region covers more than MGC_REGION_FRACTION of the grid, return its
    largest value, otherwise fall back to the global statistic (= dcorr).
    """
    grid = local_correlation_grid(x, y, x_metric, y_metric)
    m = grid.shape[0]
    if m < 4:
        raise ValueError("mgc needs at least 4 samples")
    global_stat = grid[-1, -1]
    value = global_stat
    mask = grid > global_stat
    if mask.any():
        labeled, _ = ndimage.label(mask)
        sizes = np.bincount(labeled.ravel())[1:]
        biggest = int(np.argmax(sizes)) + 1
        if sizes[biggest - 1] > MGC_REGION_FRACTION * m * m:
            value = float(grid[labeled == biggest].max())
    return float(np.clip(value, 0.0, 1.0))


def _standardize_columns(x):
    xc = x - x.mean(axis=0)
    scale = xc.std(axis=0)
    return xc / np.where(scale > 0.0, scale, 1.0)


def rv_coefficient(x, y):
    """RV coefficient between standardized sample matrices.

    trace(Sxy Syx) / sqrt(trace(Sxx^2) trace(Syy^2)) on column-centered,
    unit-variance columns (standardizing makes the coefficient invariant to
    per-variable scale); 0 when either side is degenerate.
    """
    x = _as_sample_matrix(x)
    y = _as_sample_matrix(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"sample counts differ: {x.shape[0]} vs {y.shape[0]}")
    xc = _standardize_columns(x)
    yc = _standardize_columns(y)
    sxy = xc.T @ yc
    sxx = xc.T @ xc
    syy = yc.T @ yc
    num = float(np.sum(sxy * sxy))
    den = float(np.sqrt(np.sum(sxx * sxx) * np.sum(syy * syy)))
    if den <= DEGENERATE_TOL:
        return 0.0
    return float(np.clip(num / den, 0.0, 1.0))


def _inverse_sqrt(a):
    w, v = np.linalg.eigh(a)
    w = np.maximum(w, np.finfo(float).tiny)
    return (v / np.sqrt(w)) @ v.T


def cca_corr(x, y):
    """Largest ridge-regularized canonical correlation.

    The ridge 1e-8 * trace(Sxx)/d keeps the covariance inverses finite when
    columns are collinear or d exceeds m.
    """
    x = _as_sample_matrix(x)
    y = _as_sample_matrix(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"sample counts differ: {x.shape[0]} vs {y.shape[0]}")
    m = x.shape[0]
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    sxx = xc.T @ xc / m
    syy = yc.T @ yc / m
    tx = float(np.trace(sxx))
    ty = float(np.trace(syy))
    if tx <= DEGENERATE_TOL or ty <= DEGENERATE_TOL:
        return 0.0
    ridge = 1e-8 * tx / x.shape[1]
    left = _inverse_sqrt(sxx + ridge * np.eye(x.shape[1]))
    right = _inverse_sqrt(syy + ridge * np.eye(y.shape[1]))
    sigma = np.linalg.svd(left @ (xc.T @ yc / m) @ right, compute_uv=False)
    return float(np.clip(sigma[0], 0.0, 1.0))


def one_hot(labels):
    """Indicator column per distinct label, in sorted label order."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    return (labels[:, None] == classes[None, :]).astype(float)


def feature_label_correlation(features, labels, statistic):
    """Dependence between a numeric feature sample and a label vector.

    dcorr and mgc use the 0/1 mismatch metric on the labels; rv and cca see
    the labels as one-hot columns.
    """
    if statistic == "dcorr":
        return dcorr(features, labels, y_metric="discrete")
    if statistic == "mgc":
        return mgc(features, labels, y_metric="discrete")
    if statistic == "rv":
        return rv_coefficient(features, one_hot(labels))
    if statistic == "cca":
        return cca_corr(features, one_hot(labels))
    raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")
