"""Scoring recovered coefficients and index sets against ground truth."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RunMetrics", "l2_error", "f1_set", "score_run"]


@dataclass
class RunMetrics:
    l2_error: float
    f1_uncorrupted: float
    f1_features: float
    wall_time_seconds: float
    config_echo: dict = field(default_factory=dict)


def l2_error(beta_hat, beta_star):
    """L2 distance between sparse coefficient vectors, aligned by feature
    id over the union of supports (missing ids read as zero)."""
    keys = set(beta_hat.entries) | set(beta_star.entries)
    if not keys:
        return 0.0
    diffs = np.array([beta_hat.get(k) - beta_star.get(k) for k in keys])
    return float(np.linalg.norm(diffs))


def f1_set(estimated, truth):
    """F1 between two index sets: 1.0 when both empty, 0.0 when disjoint."""
    est = set(estimated)
    tru = set(truth)
    if not est and not tru:
        return 1.0
    inter = len(est & tru)
    if inter == 0:
        return 0.0
    precision = inter / len(est)
    recall = inter / len(tru)
    return 2.0 * precision * recall / (precision + recall)


def score_run(result, truth, wall_time_seconds, config_echo=None):
    """Assemble RunMetrics for one solve against its instance's truth."""
    if result.s_hat.bound != truth.s_star.bound:
        raise ValueError(
            f"result over {result.s_hat.bound} samples scored against truth "
            f"over {truth.s_star.bound} (instance mismatch)"
        )
    return RunMetrics(
        l2_error=l2_error(result.beta_hat, truth.beta_star),
        f1_uncorrupted=f1_set(result.s_hat, truth.s_star),
        f1_features=f1_set(result.psi_hat, truth.psi_star),
        wall_time_seconds=float(wall_time_seconds),
        config_echo=dict(config_echo or {}),
    )
