"""Residual hard thresholding and adaptive estimation of the uncorrupted size.

``hard_threshold_select`` keeps the tau samples of smallest residual
magnitude. ``estimate_tau`` scans tau from n down to ceil(n/2)+1 and
accepts the first tau whose boundary residual satisfies

    r_(tau) <= 2 * tau * r_(tau_o) / tau_o

where r_(k) is the k-th smallest magnitude, tau' = tau - ceil(n/2), and
tau_o is the position whose squared magnitude is closest to the mean of
the tau' smallest squared magnitudes (ties to the smallest position).
If no tau satisfies the constraint the most conservative feasible size
ceil(n/2)+1 is returned with ``fallback_used`` set.
"""

from dataclasses import dataclass

import numpy as np

from .core import SampleIndexSet, round_half_up

__all__ = ["SortPermutation", "TauEstimate", "sort_by_magnitude",
           "hard_threshold_select", "estimate_tau", "update_uncorrupted_set"]


@dataclass(frozen=True)
class SortPermutation:
    """order[i] = sample index holding the (i+1)-th smallest magnitude."""

    order: np.ndarray

    def __len__(self):
        return int(self.order.size)


@dataclass(frozen=True)
class TauEstimate:
    tau_hat: int
    tau_o: int
    tau_prime: int
    fallback_used: bool


def _checked(r):
    r = np.asarray(r, dtype=np.float64).ravel()
    if np.any(np.isnan(r)):
        raise ValueError("residual vector contains NaN")
    return r


def sort_by_magnitude(r):
    """Ascending stable sort of residual magnitudes; ties by sample index."""
    r = _checked(r)
    return SortPermutation(np.argsort(np.abs(r), kind="stable"))


def hard_threshold_select(r, tau):
    """The tau sample indices of smallest residual magnitude, sorted by index."""
    r = _checked(r)
    n = r.size
    if not 0 <= tau <= n:
        raise ValueError(f"tau={tau} outside [0, {n}]")
    perm = sort_by_magnitude(r)
    return SampleIndexSet(np.sort(perm.order[:tau]), n)


def estimate_tau(r):
    """Adaptive uncorrupted-size estimate from a residual vector.

    Vectorized over all candidate tau values: the tie rule for tau_o
    (squared magnitude closest to the prefix mean, smallest position
    wins) is resolved with searchsorted on the sorted squares.
    """
    r = _checked(r)
    n = r.size
    if n < 2:
        raise ValueError("need at least 2 samples to estimate tau")
    h = -(-n // 2)  # ceil(n/2)
    order = np.argsort(np.abs(r), kind="stable")
    rs = np.abs(r)[order]
    r2 = rs * rs
    prefix = np.cumsum(r2)

    taus = np.arange(h + 1, n + 1)          # candidates, ascending
    tprime = taus - h
    m = prefix[tprime - 1] / tprime

    # position k in [1, n] minimizing |r2[k-1] - m|, ties -> smallest k
    j = np.searchsorted(r2, m, side="left")
    j = np.clip(j, 0, n - 1)
    jm1 = np.clip(j - 1, 0, n - 1)
    pick = np.where((j > 0) & (np.abs(r2[jm1] - m) <= np.abs(r2[j] - m)), jm1, j)
    # duplicates of the chosen value: take its first occurrence
    k0 = np.searchsorted(r2, r2[pick], side="left")
    tau_o = k0 + 1

    ok = rs[taus - 1] <= 2.0 * taus * rs[tau_o - 1] / tau_o
    hits = np.nonzero(ok)[0]
    if hits.size:
        i = int(hits[-1])               # largest accepted tau
        return TauEstimate(int(taus[i]), int(tau_o[i]), int(tprime[i]), False)
    return TauEstimate(h + 1, int(tau_o[0]), 1, True)


def update_uncorrupted_set(r, mode="adaptive", gamma=None):
    """Re-estimate the working uncorrupted set from residuals.

    ``mode="adaptive"`` sizes the set with ``estimate_tau``;
    ``mode="fixed"`` uses round(gamma * n) for a user-known clean ratio.
    """
    r = _checked(r)
    if mode == "adaptive":
        tau = estimate_tau(r).tau_hat
    elif mode == "fixed":
        if gamma is None or not 0.0 < gamma <= 1.0:
            raise ValueError("fixed mode needs gamma in (0, 1]")
        tau = round_half_up(gamma * r.size)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return hard_threshold_select(r, tau)
