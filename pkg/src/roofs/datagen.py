"""Synthetic corrupted-regression instances with full ground truth.

The generative model is ``y = X^T beta_star + u + eps`` with a Gaussian
design, a unit-norm sparse coefficient vector, an adversarial corruption
vector ``u`` supported on a uniformly random subset of samples with
entries uniform on ``[-c*max|y_star|, c*max|y_star|]``, and dense
Gaussian noise ``eps``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    FeatureBatch,
    FeatureIdSet,
    SampleIndexSet,
    SparseCoefficients,
    round_half_up,
)

__all__ = ["GenConfig", "GroundTruth", "GaussianDesign", "gen_coefficients",
           "gen_design", "gen_response", "make_instance"]

PRNG_IDENTITY = "numpy.random.Generator(PCG64), per-feature SeedSequence spawn keys"


@dataclass(frozen=True)
class GenConfig:
    """Parameters of one synthetic instance.

    ``corruption_ratio`` is the corrupted fraction 1 - gamma. Values in
    [0.5, 1) are allowed for stress runs but break the assumptions of the
    theory checks, so they trigger a warning.
    """

    p: int
    n: int
    mu: int
    corruption_ratio: float = 0.0
    sigma: float = 0.1
    corruption_scale: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.mu <= self.p:
            raise ValueError("need 0 < mu <= p")
        if self.n < 1:
            raise ValueError("need n >= 1")
        if not 0.0 <= self.corruption_ratio < 1.0:
            raise ValueError("corruption_ratio must be in [0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.corruption_scale <= 0:
            raise ValueError("corruption_scale must be > 0")
        if self.corruption_ratio >= 0.5:
            warnings.warn(
                "corruption_ratio >= 0.5 leaves fewer than half the samples "
                "uncorrupted; theory checks do not apply",
                stacklevel=2,
            )


@dataclass
class GroundTruth:
    """Everything the generator knows and the solver must not see."""

    beta_star: SparseCoefficients
    u: np.ndarray
    epsilon: np.ndarray
    s_star: SampleIndexSet
    psi_star: FeatureIdSet

    @property
    def n(self):
        return self.s_star.bound

    @property
    def gamma(self):
        return len(self.s_star) / self.s_star.bound


class GaussianDesign:
    """Lazy p x n standard-normal design.

    Rows are generated on demand from a per-feature seed sequence, so any
    subset of rows can be materialized without ever holding all p rows,
    and the same (seed, feature id) pair always reproduces the same row.
    """

    def __init__(self, p, n, root_seed):
        self.p = int(p)
        self.n = int(n)
        self.root_seed = int(root_seed)

    def row(self, fid):
        if not 0 <= fid < self.p:
            raise IndexError(f"feature id {fid} outside [0, {self.p})")
        ss = np.random.SeedSequence(self.root_seed, spawn_key=(int(fid),))
        return np.random.default_rng(ss).standard_normal(self.n)

    def rows(self, fids):
        fids = np.asarray(fids, dtype=np.int64).ravel()
        out = np.empty((fids.size, self.n))
        for i, fid in enumerate(fids):
            out[i] = self.row(int(fid))
        return out

    def iter_batches(self, batch_size, passes=1):
        """Yield FeatureBatch objects covering ids 0..p-1 in order.

        ``passes > 1`` replays the same schedule; re-deliveries are legal
        because ids are stable and rows are reproducible.
        """
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        k = 0
        for _ in range(passes):
            for start in range(0, self.p, batch_size):
                ids = np.arange(start, min(start + batch_size, self.p))
                yield FeatureBatch(k, FeatureIdSet(ids), self.rows(ids))
                k += 1


def gen_coefficients(cfg, rng):
    """Unit-norm coefficients on a uniformly random mu-sized support."""
    support = np.sort(rng.choice(cfg.p, size=cfg.mu, replace=False))
    w = rng.standard_normal(cfg.mu)
    nrm = np.linalg.norm(w)
    if nrm == 0.0:  # probability zero; regenerate deterministically
        w = np.ones(cfg.mu)
        nrm = np.sqrt(cfg.mu)
    w /= nrm
    return SparseCoefficients(dict(zip(support.tolist(), w.tolist())))


def gen_design(cfg, rng):
    """Lazy iid N(0,1) design; the row seed is drawn once from ``rng``."""
    root = int(rng.integers(0, 2**63 - 1))
    return GaussianDesign(cfg.p, cfg.n, root)


def gen_response(design, beta_star, cfg, rng):
    """Corrupted response vector plus the retained ground truth."""
    n = design.n
    supp = beta_star.support()
    y_star = np.zeros(n)
    for fid, w in beta_star.entries.items():
        y_star += w * design.row(fid)

    n_corr = round_half_up(cfg.corruption_ratio * n)
    corrupted = np.sort(rng.choice(n, size=n_corr, replace=False)) if n_corr else np.empty(0, dtype=np.int64)
    u = np.zeros(n)
    if n_corr:
        amp = cfg.corruption_scale * np.abs(y_star).max()
        u[corrupted] = rng.uniform(-amp, amp, size=n_corr)
    eps = rng.standard_normal(n) * cfg.sigma if cfg.sigma > 0 else np.zeros(n)

    y = y_star + u + eps
    mask = np.ones(n, dtype=bool)
    mask[corrupted] = False
    truth = GroundTruth(
        beta_star=beta_star,
        u=u,
        epsilon=eps,
        s_star=SampleIndexSet(np.nonzero(mask)[0], n),
        psi_star=supp,
    )
    return y, truth


def make_instance(cfg):
    """Generate (design, y, truth) for one config, fully seeded."""
    rng = np.random.default_rng(cfg.seed)
    beta_star = gen_coefficients(cfg, rng)
    design = gen_design(cfg, rng)
    y, truth = gen_response(design, beta_star, cfg, rng)
    return design, y, truth
