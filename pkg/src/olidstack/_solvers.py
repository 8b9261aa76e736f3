"""Numba kernels for the two linear SVM solvers.

Both work on a design matrix whose last column is the constant bias
feature, so the bias is regularized like any other weight.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _next(state):
    # splitmix64
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _shuffle(order, state):
    for i in range(order.shape[0] - 1, 0, -1):
        j = np.int64(_next(state) % np.uint64(i + 1))
        order[i], order[j] = order[j], order[i]


@njit(cache=True, nogil=True)
def dual_cd_hinge(indptr, indices, data, y, C, tol, max_iter, seed, dim):
    """Dual coordinate descent for 0.5*||w||^2 + C * sum hinge(y_i w.x_i).

    CSR rows; returns (w, alpha, passes, converged, dual objective after
    each pass).
    """
    n = y.shape[0]
    w = np.zeros(dim)
    alpha = np.zeros(n)
    qd = np.zeros(n)
    for i in range(n):
        s = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            s += data[k] * data[k]
        qd[i] = s
    order = np.arange(n)
    state = np.array([np.uint64(seed)], dtype=np.uint64)
    trace = np.zeros(max_iter)
    converged = False
    it = 0
    while it < max_iter:
        _shuffle(order, state)
        pg_max = -np.inf
        pg_min = np.inf
        for t in range(n):
            i = order[t]
            if qd[i] <= 0.0:
                continue
            g = 0.0
            for k in range(indptr[i], indptr[i + 1]):
                g += w[indices[k]] * data[k]
            g = y[i] * g - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if abs(pg) > 1e-12:
                new = min(max(a - g / qd[i], 0.0), C)
                alpha[i] = new
                d = (new - a) * y[i]
                if d != 0.0:
                    for k in range(indptr[i], indptr[i + 1]):
                        w[indices[k]] += d * data[k]
        obj = 0.5 * np.dot(w, w) - alpha.sum()
        trace[it] = obj
        it += 1
        if pg_max - pg_min <= tol:
            converged = True
            break
    return w, alpha, it, converged, trace[:it]


@njit(cache=True, nogil=True)
def primal_cd_l1_sqhinge(indptr, indices, data, y, C, tol, max_iter, seed):
    """Coordinate descent (Newton direction + backtracking) for
    ||w||_1 + C * sum max(0, 1 - y_i w.x_i)^2.

    CSC columns; returns (w, passes, converged, objective after each pass).
    """
    dim = indptr.shape[0] - 1
    n = y.shape[0]
    w = np.zeros(dim)
    b = np.ones(n)
    order = np.arange(dim)
    state = np.array([np.uint64(seed)], dtype=np.uint64)
    trace = np.zeros(max_iter)
    sigma = 0.01
    gnorm_init = 0.0
    converged = False
    it = 0
    while it < max_iter:
        _shuffle(order, state)
        gnorm = 0.0
        for t in range(dim):
            j = order[t]
            g = 0.0
            h = 0.0
            for k in range(indptr[j], indptr[j + 1]):
                i = indices[k]
                if b[i] > 0.0:
                    v = data[k]
                    g -= 2.0 * C * y[i] * v * b[i]
                    h += 2.0 * C * v * v
            h = max(h, 1e-12)
            gp = g + 1.0
            gn = g - 1.0
            wj = w[j]
            if wj == 0.0:
                if gp < 0.0:
                    viol = -gp
                elif gn > 0.0:
                    viol = gn
                else:
                    viol = 0.0
            elif wj > 0.0:
                viol = abs(gp)
            else:
                viol = abs(gn)
            gnorm += viol
            if gp <= h * wj:
                d = -gp / h
            elif gn >= h * wj:
                d = -gn / h
            else:
                d = -wj
            if abs(d) < 1e-12:
                continue
            delta = g * d + abs(wj + d) - abs(wj)
            accepted = False
            for _ in range(30):
                change = abs(wj + d) - abs(wj)
                for k in range(indptr[j], indptr[j + 1]):
                    i = indices[k]
                    old = b[i]
                    new = old - y[i] * data[k] * d
                    lo = old if old > 0.0 else 0.0
                    ln = new if new > 0.0 else 0.0
                    change += C * (ln * ln - lo * lo)
                if change <= sigma * delta:
                    accepted = True
                    break
                d *= 0.5
                delta *= 0.5
            if not accepted:
                continue
            w[j] = wj + d
            for k in range(indptr[j], indptr[j + 1]):
                i = indices[k]
                b[i] -= y[i] * data[k] * d
        obj = 0.0
        for j in range(dim):
            obj += abs(w[j])
        for i in range(n):
            if b[i] > 0.0:
                obj += C * b[i] * b[i]
        trace[it] = obj
        if it == 0:
            gnorm_init = gnorm
        it += 1
        if gnorm <= tol * gnorm_init:
            converged = True
            break
    return w, it, converged, trace[:it]
