"""Streaming robust solver: per-batch feature substitution with residual
hard thresholding.

Per delivered batch the solver (i) merges the incoming ids into the
retained set, (ii) seeds each arrival's weight with its coordinate
least-squares fit against the current working residual so the first
substitution decision compares like with like, then (iii) iterates

    gradient step on the retained block over the working sample set
    -> truncate to the mu largest-magnitude weights
    -> refresh the absolute residual
    -> re-estimate the working uncorrupted sample set

until the working residual stops moving (L2 change below eps * n) or an
iteration budget runs out. Intermediate batches run under a small budget
(`mid_batch_iters`): keeping the fit deliberately unconverged while most
of the signal is still undelivered both stabilizes the adaptive size
estimate and acts as implicit regularization. The final batch runs to
the full convergence criterion.

When the adaptive size estimate is fed, residual magnitudes on the
currently fitted set are inflated by the least-squares deflation factor
sqrt(1 - n_features/n_fitted_samples) (`dof_correction`); without this
the estimate feeds back on its own overfit and can spiral the working
set down to its floor. Set membership is always decided on the plain
residual ordering.
"""

import time
from dataclasses import dataclass

import numpy as np

from .core import (
    FeatureIdSet,
    FeatureStore,
    SampleIndexSet,
    SparseCoefficients,
    set_union,
)
from .thresholding import estimate_tau, hard_threshold_select, update_uncorrupted_set

__all__ = ["SolverConfig", "SolverState", "SolveResult", "ingest_batch",
           "gradient_step", "auto_step", "prune_features", "inner_loop", "solve"]

AUTO_STEP_MIN = 1e-6
_POWER_ITERS = 20
_POWER_SEED = 0x5EED
# staleness policy for the cached auto step inside the inner loop
_ETA_REFRESH_EVERY = 50
_ETA_SIZE_DRIFT = 0.25


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs; defaults are recorded in every result file.

    tau_mode is "adaptive" (size from the residual vector) or "fixed"
    (size = round(gamma * n) from prior knowledge). ``eta=None`` selects
    the automatic 1/sigma_max^2 step. ``seed`` is carried for config
    echoing; all solver paths are deterministic.
    """

    mu: int
    eta: float | None = None
    epsilon: float = 1e-6
    tau_mode: str = "adaptive"
    gamma: float | None = None
    max_inner_iters: int = 500
    mid_batch_iters: int = 20
    warm_start: bool = True
    dof_correction: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.mu < 1:
            raise ValueError("mu must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_inner_iters < 1 or self.mid_batch_iters < 1:
            raise ValueError("iteration budgets must be >= 1")
        if self.tau_mode not in ("adaptive", "fixed"):
            raise ValueError("tau_mode must be 'adaptive' or 'fixed'")
        if self.tau_mode == "fixed" and (self.gamma is None or not 0 < self.gamma <= 1):
            raise ValueError("fixed mode needs gamma in (0, 1]")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be > 0 when given")


@dataclass
class SolverState:
    """Mutable per-solve state; owned by exactly one solve at a time."""

    beta: SparseCoefficients
    psi: FeatureIdSet
    s_t: SampleIndexSet
    r_t: np.ndarray
    t: int
    k: int
    store: FeatureStore

    @classmethod
    def initial(cls, n):
        return cls(
            beta=SparseCoefficients(),
            psi=FeatureIdSet.empty(),
            s_t=SampleIndexSet.full(n),
            r_t=np.zeros(n),
            t=0,
            k=0,
            store=FeatureStore(n),
        )


@dataclass
class SolveResult:
    beta_hat: SparseCoefficients
    s_hat: SampleIndexSet
    psi_hat: FeatureIdSet
    objective_trace: list
    inner_iterations_total: int
    converged_per_batch: list
    wall_time: float
    last_eta: float
    tau_fallback_count: int


def ingest_batch(state, batch):
    """Merge a delivered batch: union ids, store rows, new weights zero.

    Re-delivery of an id with identical values is a no-op; differing
    values raise StreamInconsistencyError.
    """
    if batch.n != state.store.n:
        raise ValueError(f"batch has {batch.n} columns, expected {state.store.n}")
    state.store.add_batch(batch)
    state.psi = set_union(state.psi, batch.ids)
    return state


def _design_block(state):
    return state.store.matrix(state.psi)


def _residual_vector(X, b, y):
    return np.abs(y - X.T @ b)


def gradient_step(state, y, eta):
    """One least-squares gradient step restricted to (psi, s_t)."""
    if len(state.s_t) == 0:
        raise RuntimeError("gradient step with empty working sample set")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if len(state.psi) == 0:
        return state
    y = np.asarray(y, dtype=np.float64)
    X = _design_block(state)
    b = state.beta.to_vector(state.psi)
    e = np.zeros(state.store.n)
    idx = state.s_t.indices
    e[idx] = (X.T @ b)[idx] - y[idx]
    b -= eta * (X @ e)
    state.beta = SparseCoefficients.from_vector(state.psi, b)
    return state


def auto_step(state):
    """Step size 1/sigma_max^2 of the restricted design X[psi, s_t].

    sigma_max is estimated by 20 power iterations from a fixed seeded
    start vector; an all-zero block falls back to AUTO_STEP_MIN. The
    resulting step guarantees descent of the restricted objective.
    """
    if len(state.psi) == 0 or len(state.s_t) == 0:
        raise RuntimeError("auto step needs nonempty psi and s_t")
    B = _design_block(state)[:, state.s_t.indices]
    s2 = _sigma_max_sq(B)
    if s2 <= 0.0:
        return AUTO_STEP_MIN
    return 1.0 / s2


def _sigma_max_sq(B):
    if B.size == 0 or not np.any(B):
        return 0.0
    rng = np.random.default_rng(_POWER_SEED)
    w = rng.standard_normal(B.shape[0])
    nw = np.linalg.norm(w)
    if nw == 0.0:
        return 0.0
    w /= nw
    for _ in range(_POWER_ITERS):
        z = B.T @ w
        w2 = B @ z
        nw = np.linalg.norm(w2)
        if nw == 0.0:
            return 0.0
        w = w2 / nw
    z = B.T @ w
    return float(z @ z)


def prune_features(state, mu):
    """Zero and drop all but the mu largest-magnitude weights.

    Zero-weight features count as smallest; ties drop the larger feature
    id first. Rows of dropped features are released from the store.
    """
    excess = len(state.psi) - mu
    if excess <= 0:
        return state
    ids = state.psi.ids
    b = state.beta.to_vector(state.psi)
    # sort by (|weight| asc, id desc): first `excess` entries are dropped
    order = np.lexsort((-ids, np.abs(b)))
    drop = ids[order[:excess]]
    keep = np.sort(order[excess:])
    state.psi = FeatureIdSet(ids[keep])
    state.beta = SparseCoefficients.from_vector(state.psi, b[keep])
    state.store.drop(drop)
    return state


def _select_working_set(r, psi_size, s, cfg):
    """Next working sample set; returns (set, fallback_used)."""
    if cfg.tau_mode == "fixed":
        return update_uncorrupted_set(r, "fixed", cfg.gamma), False
    ra = r
    if cfg.dof_correction and psi_size > 0 and len(s) > 0:
        ratio = min(psi_size / len(s), 0.95)
        ra = r.copy()
        ra[s.indices] /= np.sqrt(1.0 - ratio)
    est = estimate_tau(ra)
    return hard_threshold_select(r, est.tau_hat), est.fallback_used


def _embedded(r, s, n):
    v = np.zeros(n)
    v[s.indices] = r[s.indices]
    return v


class _EtaCache:
    """Reuse the power-iteration step while the restricted block is stable."""

    def __init__(self):
        self.eta = None
        self.psi_key = None
        self.s_size = 0
        self.age = 0

    def get(self, state):
        key = state.psi.ids.tobytes()
        stale = (
            self.eta is None
            or key != self.psi_key
            or self.age >= _ETA_REFRESH_EVERY
            or abs(len(state.s_t) - self.s_size) > _ETA_SIZE_DRIFT * max(self.s_size, 1)
        )
        if stale:
            self.eta = auto_step(state)
            self.psi_key = key
            self.s_size = len(state.s_t)
            self.age = 0
        self.age += 1
        return self.eta


def inner_loop(state, y, cfg, max_iters=None, _eta_cache=None):
    """Iterate {gradient step; prune; residual; set update} to convergence.

    Stops when the L2 distance between consecutive working residuals
    (each embedded as a length-n vector, zero off the working set) drops
    below eps * n, or after ``max_iters`` (defaults to
    cfg.max_inner_iters). The set update can settle into an exact
    period-2 cycle between two equally valid working sets, so the same
    distance is also checked two iterations back. Returns (state,
    converged, fallback_count, objective_trace, last_eta).
    """
    y = np.asarray(y, dtype=np.float64)
    n = state.store.n
    budget = cfg.max_inner_iters if max_iters is None else max_iters
    cache = _eta_cache if _eta_cache is not None else _EtaCache()
    converged = False
    fallbacks = 0
    trace = []
    eta = cfg.eta if cfg.eta is not None else AUTO_STEP_MIN
    v_prev2 = None

    for _ in range(budget):
        eta = cfg.eta if cfg.eta is not None else cache.get(state)
        gradient_step(state, y, eta)
        prune_features(state, cfg.mu)
        X = _design_block(state)
        b = state.beta.to_vector(state.psi)
        r_new = _residual_vector(X, b, y)
        s_new, fb = _select_working_set(r_new, len(state.psi), state.s_t, cfg)
        fallbacks += int(fb)

        v_old = _embedded(state.r_t, state.s_t, n)
        v_new = _embedded(r_new, s_new, n)
        delta = np.linalg.norm(v_new - v_old)
        delta2 = np.linalg.norm(v_new - v_prev2) if v_prev2 is not None else np.inf
        v_prev2 = v_old
        state.r_t = r_new
        state.s_t = s_new
        state.t += 1
        trace.append(float(r_new[s_new.indices] @ r_new[s_new.indices]))
        if delta < cfg.epsilon * n or delta2 < cfg.epsilon * n:
            converged = True
            break
    return state, converged, fallbacks, trace, eta


def _warm_start_arrivals(state, y, new_ids):
    """Seed arrival weights with their coordinate LS fit on the working set.

    For a fresh feature x the seed is <x_S, resid_S> / ||x_S||^2, the
    weight a one-coordinate refit against the current residual would
    give it. Without this, arrivals face the first truncation at near
    zero weight and substitution never fires.
    """
    if len(new_ids) == 0 or len(state.s_t) == 0:
        return
    y = np.asarray(y, dtype=np.float64)
    idx = state.s_t.indices
    X = _design_block(state)
    b = state.beta.to_vector(state.psi)
    resid_s = y[idx] - (X.T @ b)[idx]
    weights = dict(state.beta.entries)
    for fid in new_ids.ids:
        xs = state.store.row(fid)[idx]
        den = float(xs @ xs)
        if den > 0.0:
            w = float(xs @ resid_s) / den
            if w != 0.0:
                weights[int(fid)] = w
    state.beta = SparseCoefficients(weights)


def solve(batches, y, cfg):
    """Run the full streaming solve over an ordered batch iterable.

    Intermediate batches run under cfg.mid_batch_iters; the final batch
    runs under cfg.max_inner_iters so the returned state satisfies the
    convergence criterion whenever the budget allows.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    t0 = time.perf_counter()

    state = SolverState.initial(n)
    state.r_t = np.abs(y)  # residual of the zero coefficient vector

    converged_per_batch = []
    trace = []
    fallbacks = 0
    iters_total = 0
    last_eta = cfg.eta if cfg.eta is not None else AUTO_STEP_MIN
    cache = _EtaCache()

    it = iter(batches)
    try:
        current = next(it)
    except StopIteration:
        raise ValueError("empty batch stream") from None

    while current is not None:
        upcoming = next(it, None)
        before = state.psi
        ingest_batch(state, current)
        if cfg.warm_start:
            new_ids = FeatureIdSet(np.setdiff1d(state.psi.ids, before.ids))
            _warm_start_arrivals(state, y, new_ids)
        budget = cfg.max_inner_iters if upcoming is None else min(
            cfg.mid_batch_iters, cfg.max_inner_iters
        )
        state, conv, fb, tr, last_eta = inner_loop(
            state, y, cfg, max_iters=budget, _eta_cache=cache
        )
        converged_per_batch.append(conv)
        fallbacks += fb
        iters_total += len(tr)
        trace.extend(tr)
        state.k += 1
        current = upcoming

    return SolveResult(
        beta_hat=state.beta,
        s_hat=state.s_t,
        psi_hat=state.psi,
        objective_trace=trace,
        inner_iterations_total=iters_total,
        converged_per_batch=converged_per_batch,
        wall_time=time.perf_counter() - t0,
        last_eta=float(last_eta),
        tau_fallback_count=fallbacks,
    )
