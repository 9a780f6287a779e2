"""Random-simplex moment estimation over a contact decomposition.

Sampling d contact points independently with probabilities c_i/d and coning
them over the origin gives a random simplex whose volume moments admit a
closed lower bound, 1/(sqrt(d!) * d^(d/2)). The estimators here exist to
measure both the first moment and the root second moment against that value;
degenerate draws (repeated or dependent points) are legitimate outcomes with
volume zero, so samples are returned as bare vertex arrays rather than as
``Simplex`` objects, which reject flat input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import simplex_volume_floor
from .john import ContactDecomposition

__all__ = ["MomentReport", "pivovarov_moments", "pivovarov_sample", "sample_volume"]


def _index_probabilities(dec: ContactDecomposition) -> np.ndarray:
    p = dec.weights / dec.weights.sum()
    return p / p.sum()


def pivovarov_sample(dec: ContactDecomposition, seed=None) -> np.ndarray:
    """Draw one random simplex as a (d+1, d) vertex array, origin first.

    Indices are sampled i.i.d. with probabilities c_i / d (the weights sum
    to d, so these are a distribution). Repeats are allowed.
    """
    rng = np.random.default_rng(seed)
    d = dec.points.shape[1]
    idx = rng.choice(dec.points.shape[0], size=d, replace=True, p=_index_probabilities(dec))
    return np.vstack([np.zeros(d), dec.points[idx]])


def sample_volume(vertices: np.ndarray) -> float:
    """Volume of the simplex spanned by a vertex array; 0.0 when flat."""
    edges = vertices[1:] - vertices[0]
    return abs(float(np.linalg.det(edges))) / math.factorial(edges.shape[1])


@dataclass(frozen=True)
class MomentReport:
    """Monte Carlo volume moments with standard errors.

    rms is sqrt(mean_sq); se_rms is its first-order propagated error,
    se_sq / (2 * rms). floor is the closed-form value both moments are
    compared against, 1/(sqrt(d!) * d^(d/2)).
    """

    dim: int
    trials: int
    mean_vol: float
    se_mean: float
    mean_sq: float
    se_sq: float
    rms: float
    se_rms: float
    floor: float


def pivovarov_moments(dec: ContactDecomposition, trials: int, seed=None) -> MomentReport:
    """Estimate E[vol] and E[vol^2] of the random simplex over `trials` draws."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    m, d = dec.points.shape
    idx = rng.choice(m, size=(trials, d), replace=True, p=_index_probabilities(dec))
    vols = np.abs(np.linalg.det(dec.points[idx])) / math.factorial(d)
    sq = vols * vols

    def with_se(values: np.ndarray) -> tuple[float, float]:
        mean = float(values.mean())
        if trials < 2:
            return mean, math.inf
        return mean, float(values.std(ddof=1)) / math.sqrt(trials)

    mean_vol, se_mean = with_se(vols)
    mean_sq, se_sq = with_se(sq)
    rms = math.sqrt(mean_sq)
    se_rms = se_sq / (2.0 * rms) if rms > 0.0 else math.inf
    return MomentReport(
        dim=d,
        trials=trials,
        mean_vol=mean_vol,
        se_mean=se_mean,
        mean_sq=mean_sq,
        se_sq=se_sq,
        rms=rms,
        se_rms=se_rms,
        floor=simplex_volume_floor(d),
    )
