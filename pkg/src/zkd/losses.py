"""Distillation losses and their analytic gradients with respect to student logits.

The combined objective for one sample is

    total = lambda_ce * CE(onehot(label), softmax(student))
          + lambda_kd * tau^2 * KL(teacher_dist || student_dist)

where the two distributions come either from a shared-constant-temperature
softmax or from a temperature softmax of Z-score standardized logits. The
tau^2 factor compensates the 1/tau^2 shrinkage of the KD gradient.

KL uses the teacher as its first (reference) argument throughout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLogitsError, InfiniteDivergenceError
from .logits import MIN_STD, as_logits, is_probability_vector, log_softmax_t, softmax_t

SCHEME_SHARED = "shared"
SCHEME_ZSCORE = "zscore"
SCHEMES = (SCHEME_SHARED, SCHEME_ZSCORE)


@dataclass(frozen=True)
class KDConfig:
    """Loss weights, base temperature, and temperature scheme.

    shared_temperature applies only under the "shared" scheme and defaults to
    tau, which keeps the two schemes comparable except for standardization.
    """

    lambda_ce: float = 1.0
    lambda_kd: float = 9.0
    tau: float = 2.0
    scheme: str = SCHEME_ZSCORE
    shared_temperature: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.tau <= 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if self.lambda_ce < 0 or self.lambda_kd < 0:
            raise ValueError("loss weights must be >= 0")
        if self.lambda_ce + self.lambda_kd <= 0:
            raise ValueError("at least one loss weight must be positive")
        if self.shared_temperature is not None and self.shared_temperature <= 0:
            raise ValueError(f"shared_temperature must be > 0, got {self.shared_temperature}")

    @property
    def shared_t(self):
        return self.tau if self.shared_temperature is None else self.shared_temperature


@dataclass(frozen=True)
class LossBreakdown:
    """Per-sample loss components; total already carries the weights and tau^2."""

    ce_hard: float
    kd: float
    total: float


def _validated_pair(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if not is_probability_vector(p) or not is_probability_vector(q):
        raise ValueError("inputs must be probability vectors (entries in [0,1], sum 1)")
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    return p, q


def entropy(p):
    """Shannon entropy -sum p log p in nats, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=np.float64)
    if not is_probability_vector(p):
        raise ValueError("input must be a probability vector")
    mask = p > 0.0
    return float(-np.sum(p[mask] * np.log(p[mask])))


def kl_div(p, q):
    """KL divergence sum p log(p/q), with 0 log(0/x) = 0; always >= 0.

    Raises InfiniteDivergenceError when p puts mass where q has none.
    """
    p, q = _validated_pair(p, q)
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        raise InfiniteDivergenceError("q is zero at an index where p is positive")
    return max(0.0, float(np.sum(p[mask] * np.log(p[mask] / q[mask]))))


def cross_entropy(p, q):
    """Cross entropy -sum p log q; equals kl_div(p, q) + entropy(p)."""
    p, q = _validated_pair(p, q)
    mask = p > 0.0
    if np.any(q[mask] == 0.0):
        raise InfiniteDivergenceError("q is zero at an index where p is positive")
    return float(-np.sum(p[mask] * np.log(q[mask])))


def kl_div_grad_student(teacher_probs, student_logits, temperature):
    """Gradient of KL(p || softmax_t(z, T)) with respect to z: (q - p) / T."""
    p = np.asarray(teacher_probs, dtype=np.float64)
    q = softmax_t(student_logits, temperature)
    return (q - p) / temperature


def cross_entropy_grad_student(teacher_probs, student_logits, temperature):
    """Gradient of CE(p, softmax_t(z, T)) with respect to z.

    Evaluated as the literal softmax-Jacobian contraction, deliberately not
    simplified to (q - p)/T, so comparing it against kl_div_grad_student is a
    meaningful consistency check rather than a tautology.
    """
    p = np.asarray(teacher_probs, dtype=np.float64)
    q = softmax_t(student_logits, temperature)
    k = q.size
    dlogq = (np.eye(k) - q[None, :]) / temperature  # row k: d log q_k / d z
    return -(p @ dlogq)


def _scheme_log_probs(logit_values, cfg, eps_guard):
    """Log-probabilities the KD term assigns to one side under cfg's scheme.

    Under the z-score scheme a sub-eps_guard std is floored (training path);
    with eps_guard = 0 a near-constant vector raises instead.
    """
    if cfg.scheme == SCHEME_SHARED:
        return log_softmax_t(logit_values, cfg.shared_t)
    z = as_logits(logit_values)
    mean = z.mean()
    std = np.sqrt(np.mean((z - mean) ** 2))
    if eps_guard > 0.0:
        std = max(std, eps_guard)
    elif std < MIN_STD:
        raise DegenerateLogitsError(
            f"z-score scheme requires non-constant logits (std={std:.3e})"
        )
    return log_softmax_t((z - mean) / (std * cfg.tau), 1.0)


def scheme_probabilities(logit_values, cfg, eps_guard=0.0):
    """Probability vector the KD term uses for one side (teacher or student)."""
    return np.exp(_scheme_log_probs(logit_values, cfg, eps_guard))


def kd_objective(teacher_logits, student_logits, label, cfg, eps_guard=0.0):
    """Combined per-sample distillation loss.

    ce_hard is the hard-label cross-entropy against the plain (temperature 1)
    student softmax; kd is the scheme KL between teacher and student
    distributions. label indexes the true class.
    """
    z = as_logits(student_logits)
    if not 0 <= label < z.size:
        raise ValueError(f"label {label} out of range for K={z.size}")
    ce_hard = float(-log_softmax_t(z, 1.0)[label])
    if cfg.lambda_kd > 0.0:
        lp_teacher = _scheme_log_probs(teacher_logits, cfg, eps_guard)
        lp_student = _scheme_log_probs(student_logits, cfg, eps_guard)
        p_teacher = np.exp(lp_teacher)
        kd = max(0.0, float(np.sum(p_teacher * (lp_teacher - lp_student))))
    else:
        kd = 0.0  # weight zero: the KD term is inert and never evaluated
    total = cfg.lambda_ce * ce_hard + cfg.lambda_kd * cfg.tau**2 * kd
    return LossBreakdown(ce_hard=ce_hard, kd=kd, total=total)


def _kd_grad_part(teacher_logits, student_logits, cfg, eps_guard):
    """Gradient of the unweighted KD term with respect to student logits."""
    if cfg.scheme == SCHEME_SHARED:
        t = cfg.shared_t
        p = softmax_t(teacher_logits, t)
        q = softmax_t(student_logits, t)
        return (q - p) / t

    p = scheme_probabilities(teacher_logits, cfg, eps_guard)
    z = as_logits(student_logits)
    k = z.size
    mean = z.mean()
    std = np.sqrt(np.mean((z - mean) ** 2))
    clamped = eps_guard > 0.0 and std < eps_guard
    if clamped:
        std = eps_guard
    elif eps_guard == 0.0 and std < MIN_STD:
        raise DegenerateLogitsError(
            f"z-score scheme requires non-constant logits (std={std:.3e})"
        )
    zhat = (z - mean) / (std * cfg.tau)
    g = softmax_t(zhat, 1.0) - p  # d KL / d zhat
    # Chain through zhat: d zhat_k / d z_j = (delta_kj - 1/K - zhat_k zhat_j tau^2 / K) / (std tau);
    # the quadratic term vanishes when std sits on the floor (std no longer varies with z).
    grad = g - g.sum() / k
    if not clamped:
        grad = grad - zhat * (cfg.tau**2 / k) * float(g @ zhat)
    return grad / (std * cfg.tau)


def kd_objective_grad(teacher_logits, student_logits, label, cfg, eps_guard=0.0):
    """Exact gradient of kd_objective's total with respect to student logits."""
    z = as_logits(student_logits)
    if not 0 <= label < z.size:
        raise ValueError(f"label {label} out of range for K={z.size}")
    grad = np.zeros_like(z)
    if cfg.lambda_ce > 0.0:
        ce_grad = softmax_t(z, 1.0)
        ce_grad[label] -= 1.0
        grad += cfg.lambda_ce * ce_grad
    if cfg.lambda_kd > 0.0:
        grad += cfg.lambda_kd * cfg.tau**2 * _kd_grad_part(
            teacher_logits, student_logits, cfg, eps_guard
        )
    return grad


@dataclass(frozen=True)
class BatchObjective:
    """Row-per-sample losses and gradients for a logit batch."""

    ce_hard: np.ndarray  # (B,)
    kd: np.ndarray  # (B,)
    total: np.ndarray  # (B,)
    d_logits: np.ndarray  # (B, K), gradient of total w.r.t. student logits


def _log_softmax_rows(z):
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))


def _scheme_log_probs_rows(logits, cfg, eps_guard):
    """Row-wise _scheme_log_probs; also returns (zhat, std, clamped) for gradients."""
    if cfg.scheme == SCHEME_SHARED:
        return _log_softmax_rows(logits / cfg.shared_t), None, None, None
    mean = logits.mean(axis=1, keepdims=True)
    std = np.sqrt(np.mean((logits - mean) ** 2, axis=1, keepdims=True))
    if eps_guard > 0.0:
        clamped = std < eps_guard
        std = np.maximum(std, eps_guard)
    else:
        if np.any(std < MIN_STD):
            raise DegenerateLogitsError("batch contains near-constant logits")
        clamped = np.zeros_like(std, dtype=bool)
    zhat = (logits - mean) / (std * cfg.tau)
    return _log_softmax_rows(zhat), zhat, std, clamped


def kd_objective_batch(teacher_logits, student_logits, labels, cfg, eps_guard=0.0):
    """Vectorized kd_objective + kd_objective_grad over a batch.

    Row b reproduces kd_objective(teacher[b], student[b], labels[b], cfg) and
    its gradient exactly; this exists so training loops do not pay per-sample
    call overhead. teacher_logits may be None when cfg.lambda_kd == 0.
    """
    z = np.asarray(student_logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if z.ndim != 2:
        raise ValueError(f"student logits must be a (B, K) batch, got shape {z.shape}")
    b, k = z.shape
    if y.shape != (b,) or y.min() < 0 or y.max() >= k:
        raise ValueError("labels must be one index in [0, K) per row")
    rows = np.arange(b)

    lsm1 = _log_softmax_rows(z)
    ce = -lsm1[rows, y]
    ce_grad = np.exp(lsm1)
    ce_grad[rows, y] -= 1.0

    if cfg.lambda_kd > 0.0:
        v = np.asarray(teacher_logits, dtype=np.float64)
        if v.shape != z.shape:
            raise ValueError(f"teacher batch shape {v.shape} != student {z.shape}")
        lp_v, _, _, _ = _scheme_log_probs_rows(v, cfg, eps_guard)
        lp_z, zhat, std, clamped = _scheme_log_probs_rows(z, cfg, eps_guard)
        p_v = np.exp(lp_v)
        kd = np.maximum(0.0, np.sum(p_v * (lp_v - lp_z), axis=1))
        if cfg.scheme == SCHEME_SHARED:
            t = cfg.shared_t
            kd_grad = (np.exp(lp_z) - p_v) / t
        else:
            g = np.exp(lp_z) - p_v
            kd_grad = g - g.sum(axis=1, keepdims=True) / k
            quad = zhat * (cfg.tau**2 / k) * np.sum(g * zhat, axis=1, keepdims=True)
            kd_grad = kd_grad - np.where(clamped, 0.0, quad)
            kd_grad = kd_grad / (std * cfg.tau)
        total = cfg.lambda_ce * ce + cfg.lambda_kd * cfg.tau**2 * kd
        d_logits = cfg.lambda_ce * ce_grad + cfg.lambda_kd * cfg.tau**2 * kd_grad
    else:
        kd = np.zeros(b)
        total = cfg.lambda_ce * ce
        d_logits = cfg.lambda_ce * ce_grad
    return BatchObjective(ce_hard=ce, kd=kd, total=total, d_logits=d_logits)
