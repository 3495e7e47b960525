"""Compiled numerical kernels.

Everything here is numba-jitted and deliberately free of Python objects:
these two routines sit inside the profile-likelihood search and dominate
the cost of a grid fit, so they are written loop-style and cached.
"""

import numpy as np
from numba import njit

# status bits returned by qr_ipm
CONVERGED = 0
MAX_ITER = 1
DEGENERATE = 2  # may be combined with MAX_ITER


@njit(cache=True)
def _cholesky(M, ridge):
    """In-place-free Cholesky of M + ridge*I.

    Returns (L, ok, min_pivot, max_pivot); pivots are the squared diagonal
    entries before the square root, used by the caller to sniff rank
    deficiency of the unridged matrix.
    """
    k = M.shape[0]
    L = np.zeros((k, k))
    min_piv = 1e300
    max_piv = 0.0
    for i in range(k):
        for j in range(i + 1):
            s = M[i, j]
            for t in range(j):
                s -= L[i, t] * L[j, t]
            if i == j:
                s += ridge
                if s <= 0.0:
                    return L, False, min_piv, max_piv
                L[i, i] = np.sqrt(s)
                if s < min_piv:
                    min_piv = s
                if s > max_piv:
                    max_piv = s
            else:
                L[i, j] = s / L[j, j]
    return L, True, min_piv, max_piv


@njit(cache=True)
def _chol_solve(L, rhs):
    k = L.shape[0]
    x = rhs.copy()
    for i in range(k):
        for j in range(i):
            x[i] -= L[i, j] * x[j]
        x[i] /= L[i, i]
    for i in range(k - 1, -1, -1):
        for j in range(i + 1, k):
            x[i] -= L[j, i] * x[j]
        x[i] /= L[i, i]
    return x


@njit(cache=True)
def qr_ipm(Z, y, tau, tol, max_iter, ridge):
    """Primal-dual interior-point solver for linear quantile regression.

    Works on the bounded dual of  min_theta sum rho_tau(y - Z theta):

        max { y'a : Z'a = (1 - tau) Z'1, 0 <= a <= 1 }

    with a Mehrotra predictor-corrector step; the multiplier of the
    equality constraint recovers theta.  Stops when the certified duality
    gap drops below tol * (1 + |objective|).

    Returns (theta, status, iterations) with status bits CONVERGED /
    MAX_ITER / DEGENERATE.
    """
    n, k = Z.shape
    x = np.full(n, 1.0 - tau)
    s = np.full(n, tau)

    degenerate = False
    M0 = Z.T @ Z
    tr = 0.0
    for i in range(k):
        tr += M0[i, i]
    L0, ok0, min_piv, max_piv = _cholesky(M0, ridge * (1.0 + tr))
    if not ok0:
        L0, ok0, min_piv, max_piv = _cholesky(M0, 1e-3 * (1.0 + tr))
        degenerate = True
        if not ok0:
            return np.zeros(k), MAX_ITER | DEGENERATE, 0
    elif min_piv < 1e-7 * max_piv:
        degenerate = True
    theta_ls = _chol_solve(L0, Z.T @ y)

    r0 = Z @ theta_ls - y
    mean_abs = 0.0
    for i in range(n):
        mean_abs += abs(r0[i])
    eps0 = max(1e-2 * mean_abs / n, 1e-8)
    z = np.empty(n)
    w = np.empty(n)
    for i in range(n):
        z[i] = max(r0[i], 0.0) + eps0
        w[i] = max(-r0[i], 0.0) + eps0

    nu = -theta_ls
    c = -y
    ones = np.ones(n)
    b = (1.0 - tau) * (Z.T @ ones)
    y_sum = 0.0
    for i in range(n):
        y_sum += y[i]

    status = MAX_ITER
    it = 0
    r_d = np.empty(n)
    qinv = np.empty(n)
    zx = np.empty(n)
    ws = np.empty(n)
    tmp = np.empty(n)
    dx = np.empty(n)
    dz = np.empty(n)
    dw = np.empty(n)
    theta = np.empty(k)
    for it in range(1, max_iter + 1):
        Znu = Z @ nu
        r_p = b - Z.T @ x
        for i in range(n):
            zx[i] = z[i] / x[i]
            ws[i] = w[i] / s[i]
            qinv[i] = 1.0 / (zx[i] + ws[i])
            r_d[i] = c[i] - Znu[i] - z[i] + w[i]
            # affine rhs: r_d + z - w, premultiplied by Q^-1
            tmp[i] = qinv[i] * (r_d[i] + z[i] - w[i])

        ZQ = Z * qinv.reshape(-1, 1)
        M = Z.T @ ZQ
        L, ok, min_piv, max_piv = _cholesky(M, ridge)
        if not ok:
            L, ok, min_piv, max_piv = _cholesky(M, ridge * 1e6)
            degenerate = True
            if not ok:
                status = MAX_ITER
                break
        if it == 1 and min_piv < 1e-7 * max_piv:
            degenerate = True

        # predictor (affine) direction
        dnu = _chol_solve(L, r_p + Z.T @ tmp)
        Zdnu = Z @ dnu
        ap = 1.0
        ad = 1.0
        gap = 0.0
        for i in range(n):
            dx[i] = qinv[i] * (Zdnu[i] - (r_d[i] + z[i] - w[i]))
            dz[i] = -z[i] - zx[i] * dx[i]
            dw[i] = -w[i] + ws[i] * dx[i]
            if dx[i] < 0.0:
                v = -x[i] / dx[i]
                if v < ap:
                    ap = v
            elif dx[i] > 0.0:
                v = s[i] / dx[i]
                if v < ap:
                    ap = v
            if dz[i] < 0.0:
                v = -z[i] / dz[i]
                if v < ad:
                    ad = v
            if dw[i] < 0.0:
                v = -w[i] / dw[i]
                if v < ad:
                    ad = v
            gap += x[i] * z[i] + s[i] * w[i]
        mu = gap / (2.0 * n)

        fp = min(1.0, 0.9995 * ap)
        fd = min(1.0, 0.9995 * ad)
        mu_aff = 0.0
        for i in range(n):
            mu_aff += (x[i] + fp * dx[i]) * (z[i] + fd * dz[i])
            mu_aff += (s[i] - fp * dx[i]) * (w[i] + fd * dw[i])
        mu_aff /= 2.0 * n
        sigma = (mu_aff / mu) ** 3
        if sigma > 1.0:
            sigma = 1.0

        # corrector: complementarity targets -xz - dx dz + sigma mu and
        # -sw + dx dw + sigma mu folded into the reduced rhs
        for i in range(n):
            gz = -x[i] * z[i] - dx[i] * dz[i] + sigma * mu
            gw = -s[i] * w[i] + dx[i] * dw[i] + sigma * mu
            dz[i] = gz  # stash targets; rebuilt after the solve
            dw[i] = gw
            tmp[i] = qinv[i] * (r_d[i] - gz / x[i] + gw / s[i])
        dnu = _chol_solve(L, r_p + Z.T @ tmp)
        Zdnu = Z @ dnu
        ap = 1.0
        ad = 1.0
        for i in range(n):
            gz = dz[i]
            gw = dw[i]
            rhs_i = r_d[i] - gz / x[i] + gw / s[i]
            dx[i] = qinv[i] * (Zdnu[i] - rhs_i)
            dz[i] = (gz - z[i] * dx[i]) / x[i]
            dw[i] = (gw + w[i] * dx[i]) / s[i]
            if dx[i] < 0.0:
                v = -x[i] / dx[i]
                if v < ap:
                    ap = v
            elif dx[i] > 0.0:
                v = s[i] / dx[i]
                if v < ap:
                    ap = v
            if dz[i] < 0.0:
                v = -z[i] / dz[i]
                if v < ad:
                    ad = v
            if dw[i] < 0.0:
                v = -w[i] / dw[i]
                if v < ad:
                    ad = v
        fp = min(1.0, 0.9995 * ap)
        fd = min(1.0, 0.9995 * ad)

        for i in range(n):
            x[i] += fp * dx[i]
            if x[i] <= 0.0:
                x[i] = 1e-16
            s[i] = 1.0 - x[i]
            if s[i] <= 0.0:
                s[i] = 1e-16
            z[i] += fd * dz[i]
            w[i] += fd * dw[i]
        for j in range(k):
            nu[j] += fd * dnu[j]
            theta[j] = -nu[j]

        # certified primal-dual gap on the check-loss objective
        res = y - Z @ theta
        primal = 0.0
        dual = -(1.0 - tau) * y_sum
        for i in range(n):
            if res[i] >= 0.0:
                primal += tau * res[i]
            else:
                primal += (tau - 1.0) * res[i]
            dual += y[i] * x[i]
        if primal - dual < tol * (1.0 + abs(primal)):
            status = CONVERGED
            break

    if degenerate:
        status |= DEGENERATE
    return -nu, status, it


@njit(cache=True)
def basis_design(knots, order, u):
    """Rows of normalized B-spline basis values at the points ``u``.

    ``knots`` is the full clamped knot vector (order-fold boundary knots);
    points outside the boundary are clamped, and the right boundary point
    is assigned to the last span so the partition of unity holds there.
    """
    nk = knots.shape[0]
    jn = nk - order
    a = knots[0]
    b = knots[nk - 1]
    n = u.shape[0]
    out = np.zeros((n, jn))
    left = np.empty(order)
    right = np.empty(order)
    vals = np.empty(order)
    lo = order - 1
    hi = nk - order - 1
    for r in range(n):
        xv = u[r]
        if xv < a:
            xv = a
        if xv > b:
            xv = b
        if xv >= b:
            span = hi
        else:
            span = lo
            for i in range(lo, hi + 1):
                if knots[i] <= xv < knots[i + 1]:
                    span = i
                    break
        vals[0] = 1.0
        for j in range(1, order):
            left[j] = xv - knots[span + 1 - j]
            right[j] = knots[span + j] - xv
            saved = 0.0
            for t in range(j):
                tmp = vals[t] / (right[t + 1] + left[j - t])
                vals[t] = saved + right[t + 1] * tmp
                saved = left[j - t] * tmp
            vals[j] = saved
        for j in range(order):
            out[r, span - order + 1 + j] = vals[j]
    return out
