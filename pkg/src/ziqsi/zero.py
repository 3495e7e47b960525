"""Logistic model for the probability of a positive outcome, and the map
from the target quantile level to the level of the positive part."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
SEPARATION_NORM = 30.0

_P_LO = 5e-324                    # smallest subnormal: never exactly 0
_P_HI = np.nextafter(1.0, 0.0)    # never exactly 1


@dataclass(frozen=True)
class ZeroModel:
    gamma: np.ndarray   # length p+1, intercept first
    converged: bool
    iterations: int


def fit_logistic(covariates, positive_indicator):
    """Maximum-likelihood logistic regression of 1{y > 0} on the covariates.

    The design is augmented with an intercept column.  Newton-Raphson with
    a gradient max-norm stop; complete or quasi-complete separation is
    detected by a diverging coefficient norm and reported with a warning
    instead of an error, so a Monte Carlo run can carry on.
    """
    X = np.asarray(covariates, dtype=float)
    z = np.asarray(positive_indicator, dtype=float)
    if X.ndim != 2 or z.ndim != 1 or X.shape[0] != z.shape[0]:
        raise ValueError("covariates must be n x p and indicator length n")
    n, p = X.shape
    if n <= p + 1:
        raise ValueError(f"need n > p+1 observations, got n={n}, p={p}")
    uniq = np.unique(z)
    if not np.all(np.isin(uniq, (0.0, 1.0))):
        raise ValueError("indicator must be binary")
    if uniq.size < 2:
        raise ValueError("indicator contains a single class; the zero model "
                         "is not identifiable")

    Xa = np.column_stack([np.ones(n), X])
    gamma = np.zeros(p + 1)
    converged = False
    it = 0
    for it in range(1, NEWTON_MAX_ITER + 1):
        prob = expit(Xa @ gamma)
        grad = Xa.T @ (z - prob)
        if np.max(np.abs(grad)) < NEWTON_TOL:
            converged = True
            break
        wgt = prob * (1.0 - prob)
        H = Xa.T @ (Xa * wgt[:, None])
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            H = H + 1e-10 * (1.0 + np.trace(H)) * np.eye(p + 1)
            step = np.linalg.solve(H, grad)
        gamma = gamma + step
        if np.linalg.norm(gamma) > SEPARATION_NORM:
            warnings.warn(
                "logistic fit is diverging (likely separation); returning "
                "the current iterate", RuntimeWarning)
            break
    if not converged and it == NEWTON_MAX_ITER:
        warnings.warn("logistic fit did not converge within "
                      f"{NEWTON_MAX_ITER} iterations", RuntimeWarning)
    return ZeroModel(gamma=gamma, converged=converged, iterations=it)


def positive_probability(model, x):
    """P(Y > 0 | x), clipped into the open interval (0, 1).

    Stable for linear predictors up to +-700; accepts a single covariate
    vector or an n x p matrix.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    lp = model.gamma[0] + X @ model.gamma[1:]
    prob = np.clip(expit(lp), _P_LO, _P_HI)
    return float(prob[0]) if single else prob


def gamma_map(tau, x, model):
    """Map the target level tau to the level of Y | Y > 0.

    Returns max((tau - (1 - pi)) / pi, 0), which is 0 whenever tau falls
    in the zero region and increases linearly to 1 as tau -> 1.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    pi = positive_probability(model, x)
    return tau_s_from_probability(tau, pi)


def tau_s_from_probability(tau, pi):
    """gamma_map given an already computed positive probability."""
    return np.maximum((tau - (1.0 - pi)) / pi, 0.0)


def log_likelihood(model_or_gamma, covariates, positive_indicator):
    """Mean Bernoulli log-likelihood of the indicator under the model."""
    gamma = getattr(model_or_gamma, "gamma", model_or_gamma)
    X = np.asarray(covariates, dtype=float)
    z = np.asarray(positive_indicator, dtype=float)
    lp = gamma[0] + X @ np.asarray(gamma)[1:]
    # z*lp - log(1+exp(lp)), computed stably
    return float(np.mean(z * lp - np.logaddexp(0.0, lp)))
