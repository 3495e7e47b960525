"""JSON (de)serialization for fitted models.

Floats go through Python's shortest-round-trip repr, so a save/load cycle
reproduces every stored value bit-exactly and predictions from a reloaded
model match the in-memory ones.
"""

import json

import numpy as np

from .baselines import QsiModel, ZiqLinearModel
from .curve import ZiqsiModel
from .single_index import KnotSelection, SingleIndexFit
from .splines import SplineBasis
from .zero import ZeroModel

KIND_ZIQSI = "ziqsi"
KIND_ZIQ_LINEAR = "ziq-linear"
KIND_QSI = "qsi"


def _fit_to_dict(fit):
    return {
        "level": fit.tau_s,
        "beta": fit.beta.tolist(),
        "theta": fit.theta.tolist(),
        "interior_knots": fit.basis.interior_knots.tolist(),
        "boundary": [fit.basis.a, fit.basis.b],
        "order": fit.basis.order,
        "objective": fit.profile_objective,
        "n_obs": fit.n_obs,
        "status": fit.status,
    }


def _fit_from_dict(d):
    order = int(d["order"])
    interior = np.asarray(d["interior_knots"], dtype=float)
    a, b = float(d["boundary"][0]), float(d["boundary"][1])
    knots = np.concatenate([np.full(order, a), interior, np.full(order, b)])
    basis = SplineBasis(order=order, n_interior=interior.size, a=a, b=b,
                        knots=knots)
    return SingleIndexFit(
        tau_s=float(d["level"]),
        beta=np.asarray(d["beta"], dtype=float),
        theta=np.asarray(d["theta"], dtype=float),
        basis=basis,
        profile_objective=float(d["objective"]),
        n_obs=int(d["n_obs"]),
        status=str(d["status"]),
    )


def _zero_to_dict(zero):
    return {"gamma": zero.gamma.tolist(), "converged": zero.converged,
            "iterations": zero.iterations}


def _zero_from_dict(d):
    return ZeroModel(gamma=np.asarray(d["gamma"], dtype=float),
                     converged=bool(d["converged"]),
                     iterations=int(d["iterations"]))


def model_to_dict(model):
    if isinstance(model, ZiqsiModel):
        doc = {
            "kind": KIND_ZIQSI,
            "zero": _zero_to_dict(model.zero),
            "grid_levels": model.grid_levels.tolist(),
            "fits": [_fit_to_dict(f) for f in model.fits],
            "delta": model.delta,
            "n_total": model.n_total,
            "order": model.order,
            "columns": model.columns,
        }
        if model.knot_selection is not None:
            doc["knot_selection"] = {
                "candidates": list(model.knot_selection.candidates),
                "bic_values": list(model.knot_selection.bic_values),
                "chosen": model.knot_selection.chosen,
            }
        return doc
    if isinstance(model, ZiqLinearModel):
        return {
            "kind": KIND_ZIQ_LINEAR,
            "zero": _zero_to_dict(model.zero),
            "grid_levels": model.grid_levels.tolist(),
            "coefficients": model.coefficients.tolist(),
            "delta": model.delta,
            "n_total": model.n_total,
            "columns": model.columns,
        }
    if isinstance(model, QsiModel):
        return {
            "kind": KIND_QSI,
            "grid_levels": model.grid_levels.tolist(),
            "fits": [_fit_to_dict(f) for f in model.fits],
            "order": model.order,
            "n_total": model.n_total,
            "seed": model.seed,
            "columns": model.columns,
        }
    raise TypeError(f"unsupported model type {type(model).__name__}")


def model_from_dict(doc):
    kind = doc.get("kind")
    if kind == KIND_ZIQSI:
        sel = None
        if "knot_selection" in doc:
            s = doc["knot_selection"]
            sel = KnotSelection(candidates=list(s["candidates"]),
                                bic_values=list(s["bic_values"]),
                                chosen=int(s["chosen"]))
        return ZiqsiModel(
            zero=_zero_from_dict(doc["zero"]),
            grid_levels=np.asarray(doc["grid_levels"], dtype=float),
            fits=[_fit_from_dict(f) for f in doc["fits"]],
            delta=float(doc["delta"]),
            n_total=int(doc["n_total"]),
            order=int(doc["order"]),
            knot_selection=sel,
            columns=doc.get("columns"),
        )
    if kind == KIND_ZIQ_LINEAR:
        return ZiqLinearModel(
            zero=_zero_from_dict(doc["zero"]),
            grid_levels=np.asarray(doc["grid_levels"], dtype=float),
            coefficients=np.asarray(doc["coefficients"], dtype=float),
            delta=float(doc["delta"]),
            n_total=int(doc["n_total"]),
            columns=doc.get("columns"),
        )
    if kind == KIND_QSI:
        return QsiModel(
            grid_levels=np.asarray(doc["grid_levels"], dtype=float),
            fits=[_fit_from_dict(f) for f in doc["fits"]],
            order=int(doc["order"]),
            n_total=int(doc["n_total"]),
            seed=doc.get("seed"),
            columns=doc.get("columns"),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
