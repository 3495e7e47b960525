"""Synthetic zero-inflated count generator, evaluation metrics, and the
Monte Carlo study harness.

The generative design mimics heavily dispersed microbiome read counts: a
logistic zero mass plus a positive part whose conditional quantile is a
known closed form, so estimated curves can be scored against the truth.
Randomness uses counter-based Philox streams keyed by (seed, replicate),
making parallel runs reproducible and independent of worker scheduling.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ._parallel import parallel_map
from .baselines import fit_qsi, fit_ziq_linear, predict_qsi, predict_ziq_linear
from .curve import REGION_ZERO, default_grid, fit_ziqsi, predict_quantile
from .zero import tau_s_from_probability

TRUE_GAMMA = np.array([-0.4, -0.480, -0.022, 0.021, 0.015, -0.009])

METHOD_ZIQSI = "ziqsi"
METHOD_ZIQ_LINEAR = "ziq-linear"
METHOD_QSI = "qsi"
ALL_METHODS = (METHOD_ZIQSI, METHOD_ZIQ_LINEAR, METHOD_QSI)

# covariate laws: (name, kind, params)
COVARIATE_LAWS = (
    ("x1", "bernoulli", (0.5,)),
    ("x2", "normal", (28.0, 2.0)),
    ("x3", "normal", (92.5, 13.0)),
    ("x4", "normal", (80.0, 12.0)),
    ("x5", "normal", (124.0, 18.5)),
)


def intercept_coef(tau):
    return -147.7 * tau - 50.0 * tau ** 2 - 20.0


def slope_coefs(tau):
    return np.array([
        0.6 * math.sqrt(tau) - 2.0 * tau,
        2.2 * tau ** 2,
        (2.0 / 3.0) * tau ** 2 - (1.0 / 3.0) * tau + 0.4,
        -0.1 * math.sin(2.0 * math.pi * tau),
        -0.6 * tau ** 2 + 2.0 * tau,
    ])


def link_g(tau, u):
    return (1.0 / 6.0) * tau * u ** 4 * 1e-5 + (1.0 / 15.0) * tau * u ** 2


@dataclass(frozen=True)
class TrueQuantileOracle:
    """Closed-form conditional quantile of the generative model."""

    gamma: np.ndarray = field(default_factory=lambda: TRUE_GAMMA.copy())

    def positive_probability(self, x):
        x = np.asarray(x, dtype=float)
        return float(expit(self.gamma[0] + x @ self.gamma[1:]))

    def positive_quantile(self, tau_s, x):
        x = np.asarray(x, dtype=float)
        return link_g(tau_s, intercept_coef(tau_s) + float(x @ slope_coefs(tau_s)))

    def quantile(self, tau, x):
        pi = self.positive_probability(x)
        if tau <= 1.0 - pi:
            return 0.0
        tau_s = float(tau_s_from_probability(tau, pi))
        return self.positive_quantile(tau_s, x)

    def curve(self, x, taus):
        return np.array([self.quantile(float(t), x) for t in taus])


def draw_covariates(rng, n):
    cols = []
    for _, kind, params in COVARIATE_LAWS:
        if kind == "bernoulli":
            cols.append(rng.binomial(1, params[0], n).astype(float))
        else:
            cols.append(rng.normal(params[0], params[1], n))
    return np.column_stack(cols)


def replicate_bitgen(seed, replicate):
    key = np.array([seed, replicate], dtype=np.uint64)
    return np.random.Philox(key=key)


def replicate_rng(seed, replicate):
    """Counter-based stream for one replicate: Philox keyed by (seed, r)."""
    return np.random.Generator(replicate_bitgen(seed, replicate))


def generate_dataset(n, seed, replicate=0, gamma=None):
    """One synthetic dataset: covariates, a subject-level uniform quantile
    draw, a Bernoulli positivity indicator, and the implied outcome."""
    gamma = TRUE_GAMMA if gamma is None else np.asarray(gamma, dtype=float)
    rng = replicate_rng(seed, replicate)
    X = draw_covariates(rng, n)
    tau_i = rng.uniform(size=n)
    pi = expit(gamma[0] + X @ gamma[1:])
    positive = rng.uniform(size=n) < pi
    y = np.zeros(n)
    for i in np.flatnonzero(positive):
        y[i] = link_g(tau_i[i], intercept_coef(tau_i[i]) + X[i] @ slope_coefs(tau_i[i]))
    return X, y


def _quantile_pair(p, z):
    """(q25, q75) of a normal law."""
    return p - 0.6744897501960817 * z, p + 0.6744897501960817 * z


def default_profiles():
    """Four evaluation subjects spanning low/high positive probability and
    low/high index value, placed at the covariate laws' quartiles."""
    x2 = _quantile_pair(28.0, 2.0)
    x3 = _quantile_pair(92.5, 13.0)
    x4 = _quantile_pair(80.0, 12.0)
    x5 = _quantile_pair(124.0, 18.5)
    return {
        # pi ~ 0.52: the most zero-inflated subject, large index
        "high_zero_high_index": [1.0, x2[1], x3[0], x4[0], x5[1]],
        # pi ~ 0.58, smaller index
        "high_zero_low_index": [1.0, x2[1], x3[0], x4[0], x5[0]],
        # pi ~ 0.77, large index
        "low_zero_high_index": [0.0, x2[0], x3[1], x4[1], x5[1]],
        # pi ~ 0.81, smaller index
        "low_zero_low_index": [0.0, x2[0], x3[1], x4[1], x5[0]],
    }


def default_eval_taus():
    return np.arange(1, 100) / 100.0


@dataclass
class SimConfig:
    n: int = 500
    replicates: int = 50
    seed: int = 20260811
    delta: float = 0.499
    order: int = 4
    n_knots: int | None = None
    grid_levels: list | None = None      # None -> 0.01 .. 0.99
    eval_taus: list | None = None        # None -> 0.01 .. 0.99
    methods: tuple = ALL_METHODS
    profiles: dict | None = None         # None -> default_profiles()
    gamma: list | None = None            # None -> TRUE_GAMMA

    def __post_init__(self):
        if self.n < 50:
            raise ValueError("n must be >= 50")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")

    def resolved_profiles(self):
        prof = default_profiles() if self.profiles is None else self.profiles
        return {name: np.asarray(x, dtype=float) for name, x in prof.items()}

    def resolved_grid(self):
        return default_grid() if self.grid_levels is None \
            else np.asarray(self.grid_levels, dtype=float)

    def resolved_eval_taus(self):
        return default_eval_taus() if self.eval_taus is None \
            else np.asarray(self.eval_taus, dtype=float)

    def resolved_gamma(self):
        return TRUE_GAMMA if self.gamma is None else np.asarray(self.gamma, dtype=float)

    def to_dict(self):
        return {
            "n": self.n, "replicates": self.replicates, "seed": self.seed,
            "delta": self.delta, "order": self.order, "n_knots": self.n_knots,
            "grid_levels": self.grid_levels, "eval_taus": self.eval_taus,
            "methods": list(self.methods),
            "profiles": None if self.profiles is None else
                {k: list(map(float, v)) for k, v in self.profiles.items()},
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "methods" in d and d["methods"] is not None:
            d["methods"] = tuple(d["methods"])
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class McReport:
    """Replicate-aggregated accuracy of estimated quantile curves at one
    subject, as percentages of the integrated squared true curve."""
    ribias: float
    rivar: float
    rimse: float
    mean_curve: np.ndarray
    band_lower: np.ndarray
    band_upper: np.ndarray
    negative_proportion: float
    n_replicates: int


def evaluate_metrics(curves, oracle_curve):
    """Riemann-sum bias/variance/MSE of replicate curves against the truth.

    The decomposition RIMSE = RIBIAS + RIVAR holds exactly because all
    three share the same denominator and the population-variance split is
    used across replicates.
    """
    curves = np.asarray(curves, dtype=float)
    oracle_curve = np.asarray(oracle_curve, dtype=float)
    if curves.ndim != 2 or curves.shape[1] != oracle_curve.shape[0]:
        raise ValueError("curves must be (replicates, len(tau_grid))")
    if curves.shape[0] < 2:
        raise ValueError("need at least 2 replicates")
    denom = float(np.sum(oracle_curve ** 2))
    if denom == 0.0:
        raise ValueError("oracle curve is identically zero; metrics undefined")
    mean_curve = curves.mean(axis=0)
    ribias = float(np.sum((mean_curve - oracle_curve) ** 2) / denom * 100.0)
    rivar = float(np.sum(((curves - mean_curve) ** 2).mean(axis=0)) / denom * 100.0)
    rimse = float(np.sum(((curves - oracle_curve) ** 2).mean(axis=0)) / denom * 100.0)
    lo, hi = np.percentile(curves, [2.5, 97.5], axis=0)
    return McReport(ribias=ribias, rivar=rivar, rimse=rimse,
                    mean_curve=mean_curve, band_lower=lo, band_upper=hi,
                    negative_proportion=float(np.mean(curves < 0)),
                    n_replicates=int(curves.shape[0]))


def _run_replicate(args):
    config, replicate = args
    try:
        X, y = generate_dataset(config.n, config.seed, replicate,
                                gamma=config.resolved_gamma())
        grid = config.resolved_grid()
        taus = config.resolved_eval_taus()
        profiles = config.resolved_profiles()
        out = {}
        zero_region = {}
        for method in config.methods:
            if method == METHOD_ZIQSI:
                model = fit_ziqsi(X, y, delta=config.delta, order=config.order,
                                  grid_levels=grid, n_knots=config.n_knots)
                predict = lambda x, t: predict_quantile(model, x, t)
            elif method == METHOD_ZIQ_LINEAR:
                model = fit_ziq_linear(X, y, delta=config.delta, grid_levels=grid)
                predict = lambda x, t: predict_ziq_linear(model, x, t)
            else:
                # perturbation stream: the replicate's Philox jumped once,
                # disjoint from the data-generation stream
                pert_rng = np.random.Generator(
                    replicate_bitgen(config.seed, replicate).jumped(1))
                model = fit_qsi(X, y, grid_levels=grid, order=config.order,
                                n_knots=config.n_knots, rng=pert_rng)
                predict = lambda x, t: predict_qsi(model, x, t)
            curves = {}
            zr = {}
            for name, x in profiles.items():
                preds = [predict(x, float(t)) for t in taus]
                curves[name] = [p.value for p in preds]
                in_zero = [p.region == REGION_ZERO for p in preds]
                zr[name] = [int(sum(in_zero)),
                            int(sum(1 for p, z in zip(preds, in_zero)
                                    if z and p.value == 0.0))]
            out[method] = curves
            zero_region[method] = zr
        return replicate, out, zero_region, None
    except Exception as exc:  # recorded and skipped by the caller
        return replicate, None, None, f"{type(exc).__name__}: {exc}"


def run_study(config, threads=1):
    """Full Monte Carlo study: per replicate, generate a dataset, fit every
    configured method, and score predicted curves at the subject profiles.

    Individual replicate failures are recorded and skipped; the study
    aborts when more than 10% of replicates fail.
    """
    oracle = TrueQuantileOracle(gamma=config.resolved_gamma())
    taus = config.resolved_eval_taus()
    profiles = config.resolved_profiles()

    tasks = [(config, r) for r in range(config.replicates)]
    results = parallel_map(_run_replicate, tasks, threads)
    results.sort(key=lambda item: item[0])

    failures = [{"replicate": r, "error": err}
                for r, _, _, err in results if err is not None]
    completed = [(r, curves, zr) for r, curves, zr, err in results if err is None]
    if len(failures) > 0.1 * config.replicates:
        raise RuntimeError(
            f"{len(failures)} of {config.replicates} replicates failed; "
            f"first error: {failures[0]['error']}")

    report = {
        "config": config.to_dict(),
        "replicates_requested": config.replicates,
        "replicates_completed": len(completed),
        "failures": failures,
        "tau_grid": [float(t) for t in taus],
        "profiles": {k: [float(v) for v in x] for k, x in profiles.items()},
        "oracle_curves": {},
        "methods": {},
    }
    oracle_curves = {name: oracle.curve(x, taus) for name, x in profiles.items()}
    for name, curve in oracle_curves.items():
        report["oracle_curves"][name] = curve.tolist()

    for method in config.methods:
        per_profile = {}
        for name in profiles:
            curves = np.array([curves_by_method[method][name]
                               for _, curves_by_method, _ in completed])
            metrics = evaluate_metrics(curves, oracle_curves[name])
            zero_total = sum(zr[method][name][0] for _, _, zr in completed)
            zero_exact = sum(zr[method][name][1] for _, _, zr in completed)
            per_profile[name] = {
                "ribias": metrics.ribias,
                "rivar": metrics.rivar,
                "rimse": metrics.rimse,
                "negative_proportion": metrics.negative_proportion,
                "zero_region_points": zero_total,
                "zero_region_exact": zero_exact,
                "mean_curve": metrics.mean_curve.tolist(),
                "band_lower": metrics.band_lower.tolist(),
                "band_upper": metrics.band_upper.tolist(),
            }
        report["methods"][method] = per_profile
    return report
