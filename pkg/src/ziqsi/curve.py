"""Conditional quantile curves assembled from the zero model and a grid of
positive-part fits, using the three-region construction."""

from dataclasses import dataclass

import numpy as np

from ._parallel import parallel_map
from .single_index import (KnotSelection, SingleIndexFit, default_knot_count,
                           fit_single_index, predict_index_fit, select_knots)
from .zero import ZeroModel, fit_logistic, positive_probability, \
    tau_s_from_probability

REGION_ZERO = "zero"
REGION_INTERP = "interpolation"
REGION_POSITIVE = "positive"

DEFAULT_DELTA = 0.499
DEFAULT_ORDER = 4


def default_grid():
    """Nominal positive-part levels 0.01, 0.02, ..., 0.99."""
    return np.arange(1, 100) / 100.0


@dataclass(frozen=True)
class QuantilePrediction:
    value: float
    region: str
    tau_s: float


@dataclass(frozen=True)
class ZiqsiModel:
    zero: ZeroModel
    grid_levels: np.ndarray
    fits: list            # one SingleIndexFit per grid level
    delta: float
    n_total: int
    order: int
    knot_selection: KnotSelection | None = None
    columns: list | None = None

    @property
    def n_knots(self):
        return self.fits[0].basis.n_interior


def _validate_fit_inputs(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n x p and y length n")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("inputs must be finite")
    if np.any(y < 0):
        raise ValueError("responses must be non-negative")
    return X, y


def _fit_grid_level(args):
    X_pos, y_pos, level, n_knots, order, boundary_x, ftol = args
    return fit_single_index(X_pos, y_pos, level, n_knots, order,
                            boundary_x=boundary_x, ftol=ftol)


def choose_knot_count(X_pos, y_pos, order, boundary_x, ftol=1e-6):
    """Pilot fit at the median level, then BIC scan at the pilot direction."""
    pilot_n = default_knot_count(len(y_pos), order)
    pilot = fit_single_index(X_pos, y_pos, 0.5, pilot_n, order,
                             boundary_x=boundary_x, ftol=ftol)
    return select_knots(X_pos, y_pos, 0.5, pilot.beta, order,
                        boundary_x=boundary_x)


def fit_ziqsi(X, y, delta=DEFAULT_DELTA, order=DEFAULT_ORDER, grid_levels=None,
              n_knots=None, threads=1, columns=None, ftol=1e-6):
    """Fit the two-part model: logistic zero part plus a single-index
    quantile fit of the positive responses at every grid level.

    ``n_knots=None`` selects the interior-knot count by the BIC scan at the
    median level and reuses it across the grid.
    """
    X, y = _validate_fit_inputs(X, y)
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 0.5), got {delta}")
    if order < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    grid = default_grid() if grid_levels is None else np.asarray(grid_levels, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0) \
            or grid[0] <= 0 or grid[-1] >= 1:
        raise ValueError("grid levels must be strictly increasing within (0, 1)")

    positive = y > 0
    if positive.all():
        raise ValueError(
            "all responses are positive: the two-part model degenerates; "
            "fit the plain single-index baseline (qsi) instead")
    if not positive.any():
        raise ValueError("no positive responses; nothing to fit beyond the zero mass")

    zero = fit_logistic(X, positive.astype(float))
    X_pos = X[positive]
    y_pos = y[positive]
    n0, p = X_pos.shape

    selection = None
    if n_knots is None:
        selection = choose_knot_count(X_pos, y_pos, order, X, ftol=ftol)
        n_knots = selection.chosen
    jn = n_knots + order
    if n0 < jn + p:
        raise ValueError(
            f"only {n0} positive responses for {jn} basis functions plus "
            f"{p} index coordinates; need at least {jn + p}")

    tasks = [(X_pos, y_pos, float(level), n_knots, order, X, ftol)
             for level in grid]
    fits = parallel_map(_fit_grid_level, tasks, threads)
    return ZiqsiModel(zero=zero, grid_levels=grid, fits=list(fits),
                      delta=float(delta), n_total=int(X.shape[0]),
                      order=int(order), knot_selection=selection,
                      columns=list(columns) if columns is not None else None)


def _interpolated_positive_value(grid_levels, value_at, tau_s):
    """Linear interpolation in prediction space between bracketing grid
    fits; levels beyond the grid ends clamp to the nearest fit."""
    k = len(grid_levels)
    if tau_s <= grid_levels[0]:
        return value_at(0)
    if tau_s >= grid_levels[-1]:
        return value_at(k - 1)
    hi = int(np.searchsorted(grid_levels, tau_s, side="left"))
    if grid_levels[hi] == tau_s:
        return value_at(hi)
    lo = hi - 1
    t = (tau_s - grid_levels[lo]) / (grid_levels[hi] - grid_levels[lo])
    return (1.0 - t) * value_at(lo) + t * value_at(hi)


def positive_part_value(model, x, tau_s):
    """Positive-part prediction at nominal level ``tau_s`` for one subject."""
    x = np.asarray(x, dtype=float)

    def value_at(i):
        return float(predict_index_fit(model.fits[i], x)[0])

    return _interpolated_positive_value(model.grid_levels, value_at, tau_s)


def three_region_value(tau, pi, n_total, delta, positive_value):
    """Shared three-region assembly of the conditional quantile.

    ``positive_value`` maps a nominal level tau_s to the positive-part
    prediction.  Returns (value, region, tau_s_used).
    """
    change_point = 1.0 - pi
    width = n_total ** (-delta)
    if tau < change_point:
        return 0.0, REGION_ZERO, 0.0
    if tau <= change_point + width:
        anchor_s = tau_s_from_probability(change_point + width, pi)
        anchor = positive_value(anchor_s)
        value = anchor * (tau - change_point) / width
        return value, REGION_INTERP, anchor_s
    tau_s = tau_s_from_probability(tau, pi)
    return positive_value(tau_s), REGION_POSITIVE, tau_s


def predict_quantile(model, x, tau):
    """Estimated conditional quantile of the outcome at level ``tau``."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    x = np.asarray(x, dtype=float)
    pi = positive_probability(model.zero, x)
    value, region, tau_s = three_region_value(
        tau, pi, model.n_total, model.delta,
        lambda ts: positive_part_value(model, x, ts))
    return QuantilePrediction(value=float(value), region=region,
                              tau_s=float(tau_s))


def predict_curve(model, x, taus):
    """Elementwise :func:`predict_quantile`; output order follows input."""
    return [predict_quantile(model, x, t) for t in taus]
