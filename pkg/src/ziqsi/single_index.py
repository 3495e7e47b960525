"""Profile pseudo-likelihood estimation of the single-index quantile model
for one nominal level, plus BIC selection of the interior-knot count."""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .numerics import (QR_MAX_ITER, QR_RIDGE, QR_TOL, fit_linear_quantile,
                       minimize_on_sphere)
from .splines import SplineBasis, build_basis, make_knot_vector


def default_knot_count(n_obs, order):
    """Rate-based default interior-knot count floor(n^(1/(2m+1))) + 1."""
    return int(math.floor(n_obs ** (1.0 / (2 * order + 1)))) + 1


@dataclass(frozen=True)
class ThetaFit:
    theta: np.ndarray
    objective: float        # mean check loss over the fitted rows
    basis: SplineBasis
    status: str


@dataclass(frozen=True)
class SingleIndexFit:
    tau_s: float
    beta: np.ndarray        # unit vector, first coordinate >= 0
    theta: np.ndarray
    basis: SplineBasis
    profile_objective: float
    n_obs: int
    status: str


@dataclass(frozen=True)
class KnotSelection:
    candidates: list
    bic_values: list
    chosen: int


def _boundary_from_index(u):
    a = float(u.min())
    b = float(u.max())
    if a >= b:
        # all index values identical (e.g. beta orthogonal to the data
        # spread); widen so the basis is well defined
        a, b = a - 0.5, b + 0.5
    return a, b


def _index_boundary(X, beta, boundary_x):
    ref = X if boundary_x is None else boundary_x
    return _boundary_from_index(ref @ beta)


def _profile_value(X, y, beta, tau_s, n_knots, order, boundary_x):
    """Hot-path profile evaluation: same float operations as
    ``fit_theta_given_beta(...).objective`` without the wrapper layers."""
    u_fit = np.ascontiguousarray(X @ beta)
    if boundary_x is None:
        a, b = _boundary_from_index(u_fit)
    else:
        a, b = _boundary_from_index(boundary_x @ beta)
    knots = make_knot_vector(a, b, n_knots, order)
    design = _kernels.basis_design(knots, order, u_fit)
    theta, _, _ = _kernels.qr_ipm(design, y, tau_s, QR_TOL, QR_MAX_ITER,
                                  QR_RIDGE)
    res = y - design @ theta
    return float(np.mean(np.where(res >= 0.0, tau_s * res, (tau_s - 1.0) * res)))


def fit_theta_given_beta(X, y, beta, tau_s, n_knots, order=4, boundary_x=None,
                         check_rank=False):
    """Spline coefficients minimizing the check loss at ``tau_s`` for a
    fixed index direction.

    The basis interval is the range of the index values over
    ``boundary_x`` (the full sample, when the fit itself uses only the
    positive part; defaults to ``X``).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.asarray(beta, dtype=float)
    n = y.shape[0]
    jn = n_knots + order
    if n <= jn:
        raise ValueError(
            f"{n} observations cannot support {jn} basis functions; "
            f"use a smaller knot count than {n_knots}")
    a, b = _index_boundary(X, beta, boundary_x)
    basis = build_basis(a, b, n_knots, order)
    design = _kernels.basis_design(basis.knots, order, np.ascontiguousarray(X @ beta))
    sol = fit_linear_quantile(design, y, tau_s, check_rank=check_rank)
    return ThetaFit(theta=sol.coefficients, objective=sol.objective,
                    basis=basis, status=sol.status)


def profile_objective(X, y, beta, tau_s, n_knots, order=4, boundary_x=None):
    """Pseudo-likelihood value at ``beta`` after minimizing out theta."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    beta = np.ascontiguousarray(beta, dtype=float)
    if boundary_x is not None:
        boundary_x = np.ascontiguousarray(boundary_x, dtype=float)
    return _profile_value(X, y, beta, tau_s, n_knots, order, boundary_x)


def initial_direction(X, y, tau_s):
    """Starting direction: normalized slopes of a linear quantile fit.

    Falls back to the first coordinate axis when the slopes vanish; the
    sign is flipped so the first coordinate is non-negative.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    design = np.column_stack([np.ones(y.shape[0]), X])
    sol = fit_linear_quantile(design, y, tau_s, check_rank=False)
    b = sol.coefficients[1:]
    nrm = np.linalg.norm(b)
    if not np.isfinite(nrm) or nrm < 1e-12:
        b = np.zeros(X.shape[1])
        b[0] = 1.0
        nrm = 1.0
    b = b / nrm
    if b[0] < 0.0:
        b = -b
    return b


def fit_single_index(X, y, tau_s, n_knots, order=4, boundary_x=None,
                     init=None, ftol=1e-6):
    """Profile fit of (beta, theta) at one nominal level.

    Minimizes the profile objective over the half-sphere via Nelder-Mead,
    then refits theta at the optimum.
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    if boundary_x is not None:
        boundary_x = np.ascontiguousarray(boundary_x, dtype=float)
    if not 0.0 < tau_s < 1.0:
        raise ValueError(f"tau_s must be in (0, 1), got {tau_s}")
    n, p = X.shape
    jn = n_knots + order
    if n < jn + p:
        raise ValueError(
            f"need at least {jn + p} observations for {jn} basis functions "
            f"and {p} index coordinates, got {n}")
    if init is None:
        init = initial_direction(X, y, tau_s)

    def objective(beta):
        return _profile_value(X, y, beta, tau_s, n_knots, order, boundary_x)

    res = minimize_on_sphere(objective, p, init, ftol=ftol)
    refit = fit_theta_given_beta(X, y, res.beta, tau_s, n_knots, order,
                                 boundary_x)
    return SingleIndexFit(tau_s=float(tau_s), beta=res.beta, theta=refit.theta,
                          basis=refit.basis, profile_objective=refit.objective,
                          n_obs=n, status=refit.status)


def first_local_minimum(values):
    """Index of the first entry no larger than both neighbours.

    A monotone decreasing sequence yields the last index, a monotone
    increasing one the first.
    """
    k = len(values)
    for i in range(k):
        left_ok = i == 0 or values[i] <= values[i - 1]
        right_ok = i == k - 1 or values[i] <= values[i + 1]
        if left_ok and right_ok:
            return i
    return k - 1


def select_knots(X, y, tau_s, beta, order=4, boundary_x=None, candidates=None):
    """Scan interior-knot counts and pick the first local BIC minimum.

    BIC(N) = log(fitted pseudo-likelihood) + log(n)/(2n) * (N + order),
    scanned over N = 1 .. 2*default+3.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if candidates is None:
        candidates = list(range(1, 2 * default_knot_count(n, order) + 4))
    candidates = [int(c) for c in candidates]
    bic = []
    penalty_rate = math.log(n) / (2.0 * n)
    for nk in candidates:
        fit = fit_theta_given_beta(X, y, beta, tau_s, nk, order, boundary_x)
        bic.append(math.log(max(fit.objective, 1e-300))
                   + penalty_rate * (nk + order))
    chosen = candidates[first_local_minimum(bic)]
    return KnotSelection(candidates=candidates, bic_values=bic, chosen=chosen)


def predict_index_fit(fit, X):
    """Fitted positive-part values B(x'beta)'theta for rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    u = np.ascontiguousarray(X @ fit.beta)
    design = _kernels.basis_design(fit.basis.knots, fit.basis.order, u)
    return design @ fit.theta
