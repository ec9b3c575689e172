"""Core logit operations: statistics, temperature softmax, and Z-score standardization.

Logit and probability vectors are plain 1-D float64 numpy arrays. Standard
deviations are always population ones (divisor K, not K-1); the boundedness
guarantee sqrt(K-1)/tau for standardized logits holds only under that
convention.

All functions here are pure and thread-safe.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLogitsError

# Below this population std a logit vector counts as constant and refuses to
# standardize. Training code that wants a soft fallback applies its own floor
# (see losses.kd_objective's eps_guard).
MIN_STD = 1e-12


def as_logits(values):
    """Validate and return a logit vector as a float64 array.

    Requires at least two finite entries.
    """
    z = np.asarray(values, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise ValueError(f"logit vector must be 1-D with K >= 2, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("logit vector contains NaN or Inf")
    return z


@dataclass(frozen=True)
class LogitStats:
    """Per-sample mean and population standard deviation of a logit vector."""

    mean: float
    std: float


def logit_stats(values):
    """Mean and population std (divisor K) of a logit vector."""
    z = as_logits(values)
    mean = float(z.mean())
    std = float(np.sqrt(np.mean((z - mean) ** 2)))
    return LogitStats(mean=mean, std=std)


def softmax_t(values, temperature):
    """Temperature softmax; max-subtracted so any finite input is overflow-safe."""
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = as_logits(values) / temperature
    e = np.exp(z - z.max())
    return e / e.sum()


def log_softmax_t(values, temperature):
    """Log-probabilities of softmax_t, computed without forming the exponentials' ratio."""
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    z = as_logits(values) / temperature
    shifted = z - z.max()
    return shifted - np.log(np.sum(np.exp(shifted)))


def general_softmax(values, shift, scale):
    """Two-parameter softmax exp((z - shift)/scale) / sum(...).

    The shift cancels in the normalization, so the result equals
    softmax_t(values, scale) for any shift; it exists as a distinct entry
    point because choosing shift = mean and scale = std * tau is exactly the
    standardized softmax.
    """
    if scale <= 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    z = (as_logits(values) - shift) / scale
    e = np.exp(z - z.max())
    return e / e.sum()


def zscore(values, tau, min_std=MIN_STD):
    """Standardize a logit vector to mean 0 and population std 1/tau.

    Output entries are (z - mean(z)) / (std(z) * tau). Guarantees, up to
    float64 rounding:

    * mean of the output is 0;
    * population std of the output is 1/tau;
    * every entry lies in [-sqrt(K-1)/tau, sqrt(K-1)/tau];
    * the output sorts in the same order as the input.

    Raises DegenerateLogitsError when std(z) < min_std.
    """
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    z = as_logits(values)
    mean = z.mean()
    std = np.sqrt(np.mean((z - mean) ** 2))
    if std < min_std:
        raise DegenerateLogitsError(
            f"cannot standardize near-constant logits (std={std:.3e} < {min_std:.0e})"
        )
    return (z - mean) / (std * tau)


def argmax_index(values):
    """Index of the largest entry; ties resolve to the lowest index."""
    return int(np.argmax(as_logits(values)))


def is_probability_vector(values, tol=1e-12):
    """True when entries are in [0, 1] and sum to 1 within tol."""
    p = np.asarray(values, dtype=np.float64)
    if p.ndim != 1 or p.size < 2 or not np.all(np.isfinite(p)):
        return False
    if np.any(p < 0.0) or np.any(p > 1.0):
        return False
    return abs(float(p.sum()) - 1.0) <= tol
