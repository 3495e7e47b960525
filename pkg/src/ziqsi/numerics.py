"""Low-level optimization kernels: check loss, linear quantile regression,
and derivative-free minimization over the constrained unit sphere."""

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels

QR_TOL = 1e-8
QR_MAX_ITER = 100
QR_RIDGE = 1e-9


def check_loss(u, tau):
    """Quantile (pinball) loss u * (tau - 1{u < 0}); accepts scalars or arrays."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 0.0, tau * u, (tau - 1.0) * u)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QrSolution:
    coefficients: np.ndarray
    objective: float          # mean check loss of the residuals
    status: str               # 'converged' | 'max_iter' | 'degenerate'
    iterations: int


def fit_linear_quantile(design, response, tau, check_rank=True):
    """Minimize the mean check loss of ``response - design @ theta``.

    Interior point with a small ridge on the normal-equation steps; a
    rank-deficient design is solved anyway (the ridge picks a solution)
    and reported via status='degenerate'.
    """
    Z = np.ascontiguousarray(design, dtype=float)
    y = np.ascontiguousarray(response, dtype=float)
    if Z.ndim != 2:
        raise ValueError("design must be a 2-d matrix")
    if y.ndim != 1 or Z.shape[0] != y.shape[0]:
        raise ValueError(
            f"design has {Z.shape[0]} rows but response has {y.shape[0]} entries"
        )
    n, k = Z.shape
    if n < k:
        raise ValueError(f"need at least as many rows ({n}) as columns ({k})")
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")

    theta, code, iters = _kernels.qr_ipm(Z, y, tau, QR_TOL, QR_MAX_ITER, QR_RIDGE)
    degenerate = bool(code & _kernels.DEGENERATE)
    if check_rank and not degenerate:
        degenerate = np.linalg.matrix_rank(Z) < k
    if degenerate:
        status = "degenerate"
    elif code & _kernels.MAX_ITER:
        status = "max_iter"
    else:
        status = "converged"
    objective = float(np.mean(check_loss(y - Z @ theta, tau)))
    return QrSolution(theta, objective, status, int(iters))


def unit_vector_from_angles(phi):
    """Spherical-coordinate map from R^(p-1) onto the unit sphere in R^p."""
    phi = np.asarray(phi, dtype=float)
    p = phi.shape[0] + 1
    v = np.empty(p)
    sin_prod = 1.0
    for i in range(p - 1):
        v[i] = sin_prod * np.cos(phi[i])
        sin_prod *= np.sin(phi[i])
    v[p - 1] = sin_prod
    return v


def angles_from_unit_vector(beta):
    """Inverse of :func:`unit_vector_from_angles` (any representative)."""
    beta = np.asarray(beta, dtype=float)
    p = beta.shape[0]
    phi = np.empty(p - 1)
    tail = np.sqrt(np.cumsum(beta[::-1] ** 2))[::-1]
    for i in range(p - 2):
        phi[i] = np.arccos(np.clip(beta[i] / tail[i], -1.0, 1.0)) if tail[i] > 0 else 0.0
    phi[p - 2] = np.arctan2(beta[p - 1], beta[p - 2])
    return phi


def _feasible(beta):
    # the identifiability constraint beta_1 >= 0; flipping the sign of the
    # whole vector is a reparametrization of the same model
    return -beta if beta[0] < 0.0 else beta


@dataclass(frozen=True)
class SphereResult:
    beta: np.ndarray
    objective: float
    n_eval: int
    restarts: int


class _NonFiniteObjective(RuntimeError):
    pass


def _nelder_mead(f, x0, step, ftol, maxfev, budget):
    """One Nelder-Mead run over angle coordinates.

    Non-finite values are treated as +inf so reflection steps back away from
    them; ``budget`` bounds how many such evaluations we tolerate in total.
    """
    n = x0.shape[0]
    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    for i in range(n):
        simplex[i + 1] = x0
        simplex[i + 1, i] += step

    def safe(pt):
        val = f(pt)
        if not np.isfinite(val):
            budget[0] -= 1
            if budget[0] <= 0:
                raise _NonFiniteObjective(
                    "objective returned non-finite values too many times"
                )
            return np.inf
        return val

    fv = np.array([safe(pt) for pt in simplex])
    nfe = n + 1
    while nfe < maxfev:
        order = np.argsort(fv, kind="stable")
        simplex = simplex[order]
        fv = fv[order]
        spread = fv[-1] - fv[0]
        if spread < ftol * (1.0 + abs(fv[0])):
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = safe(xr)
        nfe += 1
        if fr < fv[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = safe(xe)
            nfe += 1
            if fe < fr:
                simplex[-1], fv[-1] = xe, fe
            else:
                simplex[-1], fv[-1] = xr, fr
        elif fr < fv[-2]:
            simplex[-1], fv[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = safe(xc)
            nfe += 1
            if fc < fv[-1]:
                simplex[-1], fv[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fv[i] = safe(simplex[i])
                    nfe += 1
    best = int(np.argmin(fv))
    return simplex[best], fv[best], nfe


def minimize_on_sphere(objective, dim, init, ftol=1e-6, max_restarts=3,
                       maxfev_per_run=None, nonfinite_budget=1000):
    """Minimize ``objective`` over unit vectors with first coordinate >= 0.

    Nelder-Mead over (dim-1) spherical angles; the sign constraint is
    enforced by reflecting candidate vectors onto the feasible half-sphere
    before evaluation.  The main run starts from the best of a set of
    deterministic probe directions (the supplied init plus the coordinate
    axes); restart runs take the remaining probes and then polish the
    incumbent with a smaller simplex, stopping early once they no longer
    improve.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    init = np.asarray(init, dtype=float)
    if init.shape != (dim,):
        raise ValueError(f"init must have shape ({dim},)")
    nrm = np.linalg.norm(init)
    if not np.isfinite(nrm) or abs(nrm - 1.0) > 1e-8 or init[0] < -1e-12:
        raise ValueError("init must be a unit vector with first coordinate >= 0")

    def wrapped(phi):
        return objective(_feasible(unit_vector_from_angles(phi)))

    f_init = objective(_feasible(init.copy()))
    if not np.isfinite(f_init):
        raise ValueError("objective is not finite at the initial point")

    if maxfev_per_run is None:
        maxfev_per_run = 250 * (dim - 1)
    budget = [int(nonfinite_budget)]

    total = 0
    probes = [(f_init, init.copy())]

    def add_probe(direction):
        nonlocal total
        d = _feasible(direction / np.linalg.norm(direction))
        val = objective(d.copy())
        total += 1
        if np.isfinite(val):
            probes.append((val, d))

    # deterministic probe starts spread over the half-sphere: coordinate
    # axes plus the diagonal sign patterns
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        add_probe(e)
        if i > 0:
            add_probe(-e)
    if dim <= 6:
        for signs in itertools.product((1.0, -1.0), repeat=dim - 1):
            add_probe(np.concatenate([[1.0], signs]))
    probes.sort(key=lambda item: item[0])

    best_phi = None
    best_val = np.inf
    restarts = 0
    # spread runs from the best probes: a full run from the leader, then
    # shorter scout runs from the runners-up while they keep improving the
    # incumbent (evidence of multimodality); the final polish run finishes
    # whatever basin won
    scout_cap = min(maxfev_per_run, 80 * (dim - 1))
    r = 0
    while r < len(probes) and restarts < max_restarts:
        phi0 = angles_from_unit_vector(probes[r][1])
        cand_phi, cand_val, nfe = _nelder_mead(
            wrapped, phi0, 0.25, ftol,
            maxfev_per_run if r == 0 else scout_cap, budget)
        total += nfe
        if r > 0:
            restarts += 1
        improved = cand_val < best_val - 1e-9 * (1.0 + abs(cand_val))
        if cand_val < best_val:
            best_phi, best_val = cand_phi, cand_val
        r += 1
        if r >= 2 and not improved:
            break
    if restarts < max_restarts:
        cand_phi, cand_val, nfe = _nelder_mead(wrapped, best_phi, 0.05, ftol,
                                               maxfev_per_run, budget)
        total += nfe
        restarts += 1
        if cand_val < best_val:
            best_phi, best_val = cand_phi, cand_val

    if best_val > f_init:
        best_beta, best_val = _feasible(init.copy()), f_init
    else:
        best_beta = _feasible(unit_vector_from_angles(best_phi))
    return SphereResult(best_beta, float(best_val), total, restarts)
