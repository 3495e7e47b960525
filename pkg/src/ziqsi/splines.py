"""Equally spaced normalized B-spline bases on a closed interval."""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class SplineBasis:
    """Clamped B-spline basis of a given order with equally spaced interior knots.

    ``knots`` carries the boundary knots with order-fold repetition, so the
    basis has ``n_basis = n_interior + order`` functions forming a partition
    of unity on [a, b].
    """

    order: int
    n_interior: int
    a: float
    b: float
    knots: np.ndarray = field(repr=False)

    @property
    def n_basis(self):
        return self.n_interior + self.order

    @property
    def interior_knots(self):
        return self.knots[self.order:self.order + self.n_interior]


def make_knot_vector(a, b, n_interior, order):
    """Clamped knot vector: order-fold boundary knots around equally
    spaced interior knots."""
    interior = np.linspace(a, b, n_interior + 2)[1:-1]
    return np.concatenate([np.full(order, a), interior, np.full(order, b)])


def build_basis(a, b, n_interior, order):
    """Basis on [a, b] with ``n_interior`` equally spaced interior knots."""
    a = float(a)
    b = float(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("boundary points must be finite")
    if a >= b:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    if n_interior < 0:
        raise ValueError(f"n_interior must be >= 0, got {n_interior}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    return SplineBasis(order=int(order), n_interior=int(n_interior),
                       a=a, b=b, knots=make_knot_vector(a, b, n_interior, order))


def eval_basis(basis, u):
    """Vector of the ``n_basis`` basis values at a single point.

    Points outside [a, b] are clamped to the boundary before evaluation.
    """
    u = float(u)
    if not np.isfinite(u):
        raise ValueError("u must be finite")
    return _kernels.basis_design(basis.knots, basis.order, np.array([u]))[0]


def design_matrix(basis, u):
    """len(u) x n_basis matrix of basis values (clamped evaluation)."""
    u = np.ascontiguousarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("evaluation points must be finite")
    return _kernels.basis_design(basis.knots, basis.order, u)
