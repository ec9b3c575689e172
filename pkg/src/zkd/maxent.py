"""Entropy maximization over the simplex subject to an expectation constraint.

Two independent solution routes for the same problem:

* a dual route (solve_multiplier): bisection on the scalar multiplier of the
  Boltzmann family exp(multiplier * state) / Z, whose expectation is strictly
  increasing in the multiplier for non-constant states;
* a primal route (primal_maxent_oracle): projected entropy ascent directly on
  the distribution, never referencing the exponential form.

Their agreement certifies numerically that the temperature softmax is the
entropy maximizer, with 1/multiplier playing the role of temperature.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, UnattainableConstraintError
from .logits import as_logits
from .losses import entropy

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class MaxEntProblem:
    """States (a logit vector) plus the target value for their expectation."""

    logits: np.ndarray
    target_expectation: float


@dataclass(frozen=True)
class MaxEntSolution:
    multiplier: float
    distribution: np.ndarray
    entropy: float
    partition: float


def boltzmann(values, multiplier):
    """exp(multiplier * z) / Z, max-subtracted; multiplier may be any real."""
    z = as_logits(values) * multiplier
    e = np.exp(z - z.max())
    return e / e.sum()


def expectation_at(values, multiplier):
    """Expectation of the states under their own Boltzmann distribution.

    Strictly increasing in the multiplier whenever the states are not all
    equal; tends to min(values) / max(values) in the -inf / +inf limits.
    """
    z = as_logits(values)
    return float(z @ boltzmann(z, multiplier))


def _check_attainable(z, target):
    lo, hi = float(z.min()), float(z.max())
    if not lo < target < hi:
        raise UnattainableConstraintError(
            f"target {target} not strictly inside ({lo}, {hi}); "
            "the endpoints are reached only in the infinite-multiplier limit"
        )


def solve_multiplier(problem, tol=DEFAULT_TOL):
    """Find the multiplier whose Boltzmann expectation hits the target.

    Brackets by doubling outward from [-1, 1], then bisects until the
    expectation residual is within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    z = as_logits(problem.logits)
    target = float(problem.target_expectation)
    _check_attainable(z, target)

    lo, hi = -1.0, 1.0
    while expectation_at(z, lo) > target:
        lo *= 2.0
        if lo < -1e12:
            raise UnattainableConstraintError("bracket expansion failed (target too close to min)")
    while expectation_at(z, hi) < target:
        hi *= 2.0
        if hi > 1e12:
            raise UnattainableConstraintError("bracket expansion failed (target too close to max)")

    mid = 0.0
    for _ in range(20000):
        mid = 0.5 * (lo + hi)
        e = expectation_at(z, mid)
        if abs(e - target) <= tol:
            break
        if e < target:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError("bisection failed to reach tolerance", last_state=mid)

    dist = boltzmann(z, mid)
    scaled = z * mid
    partition = float(np.exp(np.log(np.sum(np.exp(scaled - scaled.max()))) + scaled.max()))
    return MaxEntSolution(
        multiplier=mid, distribution=dist, entropy=entropy(dist), partition=partition
    )


def _entropy_raw(q):
    mask = q > 0.0
    return float(-np.sum(q[mask] * np.log(q[mask])))


def _project_feasible(q, z, z_centered, target, sq_norm):
    """Alternate simplex clip-and-renormalize with an expectation-hyperplane shift.

    The shift runs along the mean-centered states so it leaves the coordinate
    sum untouched while restoring z @ q = target.
    """
    for _ in range(200):
        q = np.maximum(q, 0.0)
        s = q.sum()
        if s <= 0.0:
            q = np.full_like(q, 1.0 / q.size)
            s = 1.0
        q = q / s
        q = q + z_centered * ((target - float(z @ q)) / sq_norm)
        if q.min() >= 0.0 and abs(float(z @ q) - target) < 1e-13:
            return np.maximum(q, 0.0)
    return np.maximum(q, 0.0)


def primal_maxent_oracle(problem, tol=1e-8, step=0.1, max_iters=100000):
    """Maximize entropy on {simplex and z @ q = target} by projected ascent.

    Ascends along the gradient projected onto the feasible subspace (which
    keeps both equality constraints satisfied without rescaling), re-projects
    after every step, and stops at projected-gradient infinity-norm <= tol.
    The step starts at `step`, backtracks whenever a move fails to strictly
    increase the entropy, and re-grows after successes, so the iteration stays
    stable when the optimum has small entries. If float64 entropy comparisons
    can no longer certify ascent before tol is reached, the best iterate found
    is returned; that point is stationary to within float64 resolution.
    """
    z = as_logits(problem.logits)
    target = float(problem.target_expectation)
    _check_attainable(z, target)

    k = z.size
    z_centered = z - z.mean()
    sq_norm = float(z_centered @ z_centered)
    # Orthonormal basis of the feasible directions' complement: span{1, centered z}.
    u1 = np.ones(k) / np.sqrt(k)
    u2 = z_centered / np.sqrt(sq_norm)

    q = _project_feasible(np.full(k, 1.0 / k), z, z_centered, target, sq_norm)
    ent = _entropy_raw(q)
    trial_step = step
    for _ in range(max_iters):
        grad = -np.log(np.maximum(q, 1e-300)) - 1.0
        proj_grad = grad - (grad @ u1) * u1 - (grad @ u2) * u2
        if np.max(np.abs(proj_grad)) <= tol:
            return q
        for _ in range(80):
            q_new = _project_feasible(q + trial_step * proj_grad, z, z_centered, target, sq_norm)
            ent_new = _entropy_raw(q_new)
            if ent_new > ent:
                break
            trial_step *= 0.5
        else:
            return q  # step underflow: float64 cannot improve the entropy further
        q, ent = q_new, ent_new
        trial_step = min(trial_step * 1.25, 1e3)
    raise ConvergenceError("projected entropy ascent did not reach stationarity", last_state=q)


def verify_kd_form(teacher_logits, student_logits, teacher_multiplier, tol=DEFAULT_TOL):
    """Solve the distillation-side problem and return its Boltzmann solution.

    The target expectation of the student states is taken under the teacher's
    Boltzmann distribution at teacher_multiplier. The returned solution shows
    the student distribution is again a temperature softmax of its own logits,
    with its own multiplier (equal to the teacher's only in special cases such
    as identical logits).
    """
    v = as_logits(teacher_logits)
    z = as_logits(student_logits)
    if v.shape != z.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {z.shape}")
    teacher_dist = boltzmann(v, teacher_multiplier)
    target = float(z @ teacher_dist)
    return solve_multiplier(MaxEntProblem(logits=z, target_expectation=target), tol=tol)
