"""Reference solvers: non-robust least squares, a fixed-ratio thresholding
comparator, and a ground-truth oracle fit.

The comparator and the non-robust control share the streaming solver's
plumbing (same gradient update, residual and set-update operators) but
see every retained feature at once, keep the working-set size pinned
(``gamma = 1`` never excludes anything), and truncate to the mu largest
weights once, after the alternation has converged.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import FeatureBatch, SparseCoefficients
from .solver import (
    SolveResult,
    SolverConfig,
    SolverState,
    ingest_batch,
    inner_loop,
    prune_features,
    _design_block,
    _residual_vector,
    _warm_start_arrivals,
)
from .thresholding import update_uncorrupted_set

__all__ = ["BaselineKind", "ols_full", "fixed_ratio_thresholding", "oracle_ols"]


@dataclass(frozen=True)
class BaselineKind:
    """Tag for a comparison column: "ols", "oracle" or "fixed" (with gamma)."""

    tag: str
    gamma: float | None = None

    def __post_init__(self):
        if self.tag not in ("ols", "oracle", "fixed"):
            raise ValueError(f"unknown baseline tag {self.tag!r}")
        if self.tag == "fixed" and (self.gamma is None or not 0.5 < self.gamma <= 1.0):
            raise ValueError("fixed-ratio baseline needs gamma in (0.5, 1]")


def fixed_ratio_thresholding(store, y, mu, gamma, eps=1e-6, max_iters=500):
    """Alternating fit / fixed-size thresholding with full feature access.

    Alternates a gradient least-squares update on the working set with
    re-selecting the round(gamma * n) smallest residuals until the
    solver's convergence criterion, then truncates to the mu largest
    weights and refreshes the working set from the truncated fit.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must be in (0, 1]")
    if len(store) < 1:
        raise ValueError("store holds no features")
    y = np.asarray(y, dtype=np.float64)
    t0 = time.perf_counter()

    ids = store.ids()
    batch = FeatureBatch(0, ids, store.matrix(ids))
    # full width during the alternation: truncation happens at the end
    cfg = SolverConfig(
        mu=len(ids), epsilon=eps, tau_mode="fixed", gamma=gamma,
        max_inner_iters=max_iters,
    )
    state = SolverState.initial(store.n)
    state.r_t = np.abs(y)
    ingest_batch(state, batch)
    _warm_start_arrivals(state, y, ids)
    state, converged, fallbacks, trace, last_eta = inner_loop(state, y, cfg)

    prune_features(state, mu)
    X = _design_block(state)
    r = _residual_vector(X, state.beta.to_vector(state.psi), y)
    state.r_t = r
    state.s_t = update_uncorrupted_set(r, "fixed", gamma)

    return SolveResult(
        beta_hat=state.beta,
        s_hat=state.s_t,
        psi_hat=state.psi,
        objective_trace=trace,
        inner_iterations_total=len(trace),
        converged_per_batch=[converged],
        wall_time=time.perf_counter() - t0,
        last_eta=float(last_eta),
        tau_fallback_count=fallbacks,
    )


def ols_full(store, y, mu, eps=1e-6, max_iters=500):
    """Non-robust control: gradient least squares over all n samples on the
    retained features, then top-mu truncation. Identical to fixed-ratio
    thresholding with gamma = 1 (no sample is ever excluded)."""
    return fixed_ratio_thresholding(store, y, mu, 1.0, eps=eps, max_iters=max_iters).beta_hat


def oracle_ols(store, y, truth):
    """Lower-bound reference: exact least squares on the true uncorrupted
    samples restricted to the true support."""
    y = np.asarray(y, dtype=np.float64)
    psi = truth.psi_star
    s = truth.s_star
    if len(psi) == 0 or len(s) == 0:
        return SparseCoefficients()
    A = store.matrix(psi)[:, s.indices]
    coef, *_ = np.linalg.lstsq(A.T, y[s.indices], rcond=None)
    return SparseCoefficients.from_vector(psi, coef)
