"""Runtime verification of the solver's guarantees on concrete instances.

The restricted strong-convexity modulus is estimated empirically as the
minimum over sampled (feature subset, sample subset) pairs of twice the
smallest eigenvalue of the restricted Gram block; twice, because the
Hessian of ||y_S - X_S^T b||^2 is 2 X_S X_S^T. The sampled minimum is an
upper bound on the true infimum, which only loosens the bound check
through its alpha factor, so a passing check is conservative in that
direction.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import restricted_objective, round_half_up, SparseCoefficients

__all__ = ["TheoryReport", "check_prefix_monotonicity", "lambda_of_gamma", "check_working_set_bound",
           "estimate_strong_convexity", "check_error_bound", "evaluate_run"]

_REL_TOL = 1e-9  # absorbs float summation order in objective comparisons
_INV_POWER_ITERS = 100


@dataclass
class TheoryReport:
    gamma: float
    lam: float
    phi_mu_hat: float
    alpha_hat: float
    monotonicity_holds: bool
    set_bound_holds: bool
    error_bound_holds: bool
    set_bound_slack: float
    error_bound_slack: float


def check_prefix_monotonicity(r, tau1, tau2):
    """Prefix monotonicity: sum of tau1 smallest squared residuals is at
    most the sum of the tau2 smallest, for tau1 < tau2."""
    r = np.asarray(r, dtype=np.float64).ravel()
    n = r.size
    if not 1 <= tau1 < tau2 <= n:
        raise ValueError(f"need 1 <= tau1 < tau2 <= {n}")
    sq = np.sort(r * r)
    return float(sq[:tau1].sum()) <= float(sq[:tau2].sum())


def lambda_of_gamma(gamma):
    """Working-set inflation factor 1 + 128(1-gamma)/(2 gamma - 1)."""
    if gamma <= 0.5:
        raise ValueError("gamma must exceed 0.5")
    return 1.0 + 128.0 * (1.0 - gamma) / (2.0 * gamma - 1.0)


def check_working_set_bound(beta, s_t, truth, store, y):
    """Bound the working-set objective by the true-set objective.

    With tau_t <= tau_star the bound is direct; otherwise the objective
    may exceed f_{S*} by at most lambda(gamma).
    """
    gamma = truth.gamma
    if gamma <= 0.5:
        raise ValueError("bound requires more than half the samples uncorrupted")
    f_st = restricted_objective(store, beta, y, s_t)
    f_star = restricted_objective(store, beta, y, truth.s_star)
    if len(s_t) <= len(truth.s_star):
        bound = f_star
    else:
        bound = lambda_of_gamma(gamma) * f_star
    slack = bound - f_st
    return f_st <= bound * (1.0 + _REL_TOL) + _REL_TOL, slack


def _lambda_min(G, rng):
    """Smallest eigenvalue by inverse power iteration (shift 0)."""
    mu = G.shape[0]
    try:
        factor = cho_factor(G, lower=True)
    except np.linalg.LinAlgError:
        return 0.0
    v = rng.standard_normal(mu)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    for _ in range(_INV_POWER_ITERS):
        w = cho_solve(factor, v)
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            return 0.0
        v = w / nw
    return float(v @ (G @ v))


def estimate_strong_convexity(store, mu, gamma, trials, rng):
    """Empirical strong-convexity modulus over sampled restricted blocks.

    Each trial draws a mu-sized feature subset and a round(gamma*n)-sized
    sample subset and contributes 2 * lambda_min of the restricted Gram;
    a singular block contributes 0 (reported through the minimum, not
    raised). The running minimum over trials is returned.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    ids = store.ids()
    if len(ids) < mu:
        raise ValueError(f"store holds {len(ids)} features, need mu={mu}")
    n = store.n
    size_s = max(1, round_half_up(gamma * n))
    phi = np.inf
    for trial_rng in rng.spawn(trials):
        sub = np.sort(trial_rng.choice(ids.ids, size=mu, replace=False))
        samp = np.sort(trial_rng.choice(n, size=size_s, replace=False))
        B = np.stack([store.row(int(f))[samp] for f in sub])
        lam_min = _lambda_min(B @ B.T, trial_rng)
        phi = min(phi, 2.0 * lam_min)
    return float(phi)


def check_error_bound(result, truth, store, y, eta, phi_mu_hat):
    """Restricted error bound of the returned solution.

    Checks f_Shat(beta_hat) - f_Sstar(beta_star) against the bound built
    from alpha = (1/(eta*phi))^2 and lambda(gamma); lambda collapses to 1
    when the returned set is not larger than the true one. Returns
    (holds, slack).
    """
    gamma = truth.gamma
    if gamma <= 0.5:
        raise ValueError("bound requires gamma > 0.5")
    if phi_mu_hat <= 0:
        raise ValueError("need a positive strong-convexity estimate")
    if eta <= 0:
        raise ValueError("need a positive step size")
    alpha = (1.0 / (eta * phi_mu_hat)) ** 2
    lam = 1.0 if len(result.s_hat) <= len(truth.s_star) else lambda_of_gamma(gamma)
    f_hat = restricted_objective(store, result.beta_hat, y, result.s_hat)
    f_star = restricted_objective(store, truth.beta_star, y, truth.s_star)
    f_zero = restricted_objective(store, SparseCoefficients(), y, truth.s_star)
    lhs = f_hat - f_star
    rhs = (alpha * lam / (1.0 + alpha)) * f_zero + (lam / (1.0 + alpha) - 1.0) * f_star
    slack = rhs - lhs
    return lhs <= rhs + _REL_TOL * max(abs(rhs), 1.0), slack


def evaluate_run(result, truth, store, y, eta, trials=20, seed=0):
    """Run all checks for one solve and assemble a TheoryReport."""
    from .core import residual

    rng = np.random.default_rng(seed)
    gamma = truth.gamma
    mu = max(len(result.psi_hat), 1)
    phi = estimate_strong_convexity(store, mu, gamma, trials, rng)

    r_final = residual(store, result.beta_hat, y)
    n = r_final.size
    pairs = [(1, max(2, n // 2)), (max(2, n // 2), n), (1, n)]
    monotone = all(check_prefix_monotonicity(r_final, a, b) for a, b in pairs if a < b <= n)

    set_ok, set_slack = check_working_set_bound(result.beta_hat, result.s_hat, truth, store, y)
    if phi > 0:
        err_ok, err_slack = check_error_bound(result, truth, store, y, eta, phi)
        alpha = (1.0 / (eta * phi)) ** 2
    else:
        err_ok, err_slack, alpha = False, float("-inf"), float("inf")
    lam = 1.0 if len(result.s_hat) <= len(truth.s_star) else lambda_of_gamma(gamma)
    return TheoryReport(
        gamma=gamma,
        lam=lam,
        phi_mu_hat=phi,
        alpha_hat=alpha,
        monotonicity_holds=monotone,
        set_bound_holds=set_ok,
        error_bound_holds=err_ok,
        set_bound_slack=set_slack,
        error_bound_slack=err_slack,
    )
