"""Hot coordinate-descent kernels.

Written in plain loops so they JIT-compile with numba when available
(compiled artifacts are cached on disk) and still run, slower, as pure
Python otherwise.  Each kernel returns the sweep count on success and -1
when the sweep cap is reached; the callers translate that into the
package's error types.

Convergence requires both the largest coordinate move of a full sweep to
fall below ``coord_tol`` and the subgradient (KKT) residual, recomputed
from a freshly refreshed gradient, to fall below ``kkt_tol``.  Between
full sweeps an inner loop iterates only the nonzero coordinates.
"""
from __future__ import annotations

import numpy as np

try:  # pragma: no cover - exercised implicitly by every kernel call
    from numba import njit

    _jit = njit(cache=True)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    def _jit(fn):
        return fn

    HAVE_NUMBA = False

__all__ = ["HAVE_NUMBA", "cd_row", "cd_vec"]


@_jit
def cd_row(gram, cross, lam_w, beta, coord_tol, kkt_tol, max_sweeps):
    dp = gram.shape[0]
    grad = cross - gram @ beta
    sweeps = 0
    since_refresh = 0
    while sweeps < max_sweeps:
        delta = 0.0
        for i in range(dp):
            gi = gram[i, i]
            if gi <= 0.0:
                continue
            u = grad[i] + gi * beta[i]
            t = lam_w[i]
            if u > t:
                new = (u - t) / gi
            elif u < -t:
                new = (u + t) / gi
            else:
                new = 0.0
            dlt = new - beta[i]
            if dlt != 0.0:
                for r in range(dp):
                    grad[r] -= gram[i, r] * dlt  # symmetric
                beta[i] = new
                if dlt < 0.0:
                    dlt = -dlt
                if dlt > delta:
                    delta = dlt
        sweeps += 1
        since_refresh += 1
        if since_refresh >= 64:
            grad = cross - gram @ beta
            since_refresh = 0
        if delta <= coord_tol:
            grad = cross - gram @ beta
            since_refresh = 0
            viol = 0.0
            for i in range(dp):
                if beta[i] == 0.0:
                    v = abs(grad[i]) - lam_w[i]
                else:
                    if beta[i] > 0.0:
                        v = abs(grad[i] - lam_w[i])
                    else:
                        v = abs(grad[i] + lam_w[i])
                if v > viol:
                    viol = v
            if viol <= kkt_tol:
                return sweeps
        # inner loop over the current support
        while sweeps < max_sweeps:
            delta = 0.0
            for i in range(dp):
                if beta[i] == 0.0:
                    continue
                gi = gram[i, i]
                if gi <= 0.0:
                    continue
                u = grad[i] + gi * beta[i]
                t = lam_w[i]
                if u > t:
                    new = (u - t) / gi
                elif u < -t:
                    new = (u + t) / gi
                else:
                    new = 0.0
                dlt = new - beta[i]
                if dlt != 0.0:
                    for r in range(dp):
                        grad[r] -= gram[i, r] * dlt  # symmetric
                    beta[i] = new
                    if dlt < 0.0:
                        dlt = -dlt
                    if dlt > delta:
                        delta = dlt
            sweeps += 1
            since_refresh += 1
            if since_refresh >= 64:
                grad = cross - gram @ beta
                since_refresh = 0
            if delta <= coord_tol:
                break
    return -1


@_jit
def cd_vec(gram, cross, omega, lam_w, b_mat, coord_tol, kkt_tol, max_sweeps):
    dp = gram.shape[0]
    d = cross.shape[1]
    resid = cross - gram @ b_mat
    sweeps = 0
    since_refresh = 0
    while sweeps < max_sweeps:
        delta = 0.0
        for j in range(d):
            oj = omega[j, j]
            for k in range(dp):
                curv = gram[k, k] * oj
                if curv <= 0.0:
                    continue
                g = 0.0
                for c in range(d):
                    g += resid[k, c] * omega[c, j]
                u = g + curv * b_mat[k, j]
                t = lam_w[k, j]
                if u > t:
                    new = (u - t) / curv
                elif u < -t:
                    new = (u + t) / curv
                else:
                    new = 0.0
                dlt = new - b_mat[k, j]
                if dlt != 0.0:
                    for r in range(dp):
                        resid[r, j] -= gram[k, r] * dlt  # symmetric
                    b_mat[k, j] = new
                    if dlt < 0.0:
                        dlt = -dlt
                    if dlt > delta:
                        delta = dlt
        sweeps += 1
        since_refresh += 1
        if since_refresh >= 32:
            resid = cross - gram @ b_mat
            since_refresh = 0
        if delta <= coord_tol:
            resid = cross - gram @ b_mat
            since_refresh = 0
            viol = 0.0
            for k in range(dp):
                for j in range(d):
                    g = 0.0
                    for c in range(d):
                        g += resid[k, c] * omega[c, j]
                    if b_mat[k, j] == 0.0:
                        v = abs(g) - lam_w[k, j]
                    elif b_mat[k, j] > 0.0:
                        v = abs(g - lam_w[k, j])
                    else:
                        v = abs(g + lam_w[k, j])
                    if v > viol:
                        viol = v
            if viol <= kkt_tol:
                return sweeps
        while sweeps < max_sweeps:
            delta = 0.0
            for j in range(d):
                oj = omega[j, j]
                for k in range(dp):
                    if b_mat[k, j] == 0.0:
                        continue
                    curv = gram[k, k] * oj
                    if curv <= 0.0:
                        continue
                    g = 0.0
                    for c in range(d):
                        g += resid[k, c] * omega[c, j]
                    u = g + curv * b_mat[k, j]
                    t = lam_w[k, j]
                    if u > t:
                        new = (u - t) / curv
                    elif u < -t:
                        new = (u + t) / curv
                    else:
                        new = 0.0
                    dlt = new - b_mat[k, j]
                    if dlt != 0.0:
                        for r in range(dp):
                            resid[r, j] -= gram[k, r] * dlt  # symmetric
                        b_mat[k, j] = new
                        if dlt < 0.0:
                            dlt = -dlt
                        if dlt > delta:
                            delta = dlt
            sweeps += 1
            since_refresh += 1
            if since_refresh >= 32:
                resid = cross - gram @ b_mat
                since_refresh = 0
            if delta <= coord_tol:
                break
    return -1
