"""Independent brute-force oracles the production paths are checked against.

Everything here is intentionally naive (python loops, exhaustive
enumeration, dense factorizations) and shares no code with the package.
"""

import itertools
import math

import numpy as np


def naive_predict(rows, beta, sample_indices):
    """Double-loop prediction; rows and beta are plain dicts."""
    out = []
    for j in sample_indices:
        acc = 0.0
        for fid, w in beta.items():
            acc += w * rows[fid][j]
        out.append(acc)
    return np.asarray(out)


def naive_residual(rows, beta, y):
    n = len(y)
    pred = naive_predict(rows, beta, range(n))
    return np.array([abs(y[j] - pred[j]) for j in range(n)])


def exhaustive_min_norm_subset(r, tau):
    """Best tau-subset by (sum of squared residuals, index tuple)."""
    n = len(r)
    best = None
    for combo in itertools.combinations(range(n), tau):
        key = (sum(r[i] ** 2 for i in combo), combo)
        if best is None or key < best:
            best = key
    return list(best[1]) if best else []


def brute_estimate_tau(r):
    """Literal scan of the adaptive size rule; returns (tau, tau_o, fallback)."""
    r = [abs(v) for v in r]
    n = len(r)
    order = sorted(range(n), key=lambda i: (r[i], i))
    rs = [r[i] for i in order]
    h = math.ceil(n / 2)
    for tau in range(n, h, -1):
        tprime = tau - h
        m = sum(v * v for v in rs[:tprime]) / tprime
        best_k, best_d = 1, abs(rs[0] ** 2 - m)
        for k in range(2, n + 1):
            d = abs(rs[k - 1] ** 2 - m)
            if d < best_d:
                best_d, best_k = d, k
        if rs[tau - 1] <= 2.0 * tau * rs[best_k - 1] / best_k:
            return tau, best_k, False
    # recompute tau_o at the fallback size
    tau = h + 1
    m = rs[0] ** 2
    best_k, best_d = 1, abs(rs[0] ** 2 - m)
    for k in range(2, n + 1):
        d = abs(rs[k - 1] ** 2 - m)
        if d < best_d:
            best_d, best_k = d, k
    return tau, best_k, True


def dense_sigma_max(B):
    if B.size == 0:
        return 0.0
    return float(np.linalg.svd(B, compute_uv=False)[0])


def dense_lambda_min(G):
    return float(np.linalg.eigvalsh(G)[0])


def normal_equations(X, y):
    """Least squares for a features-as-rows design block."""
    return np.linalg.solve(X @ X.T, X @ y)
