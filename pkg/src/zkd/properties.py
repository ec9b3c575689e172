"""Seeded randomized property suite over the core ops and losses.

Each property draws independent random instances and checks an exact
or tolerance-bounded claim; the first falsifying instance is reported.
The suite is deterministic in (cases, seed).
"""

from dataclasses import dataclass

import numpy as np

from .logits import (
    argmax_index,
    general_softmax,
    is_probability_vector,
    logit_stats,
    softmax_t,
    zscore,
)
from .losses import (
    KDConfig,
    cross_entropy,
    cross_entropy_grad_student,
    entropy,
    kd_objective,
    kd_objective_grad,
    kl_div,
    kl_div_grad_student,
    scheme_probabilities,
)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    cases: int
    counterexample: str = ""


def _draw_logits(rng, k_max=100, spread=10.0):
    k = int(rng.integers(2, k_max + 1))
    z = rng.uniform(-spread, spread, size=k)
    while logit_stats(z).std < 1e-6:
        z = rng.uniform(-spread, spread, size=k)
    return z


def _draw_tau(rng):
    return float(rng.uniform(0.25, 8.0))


def _draw_probs(rng, k):
    p = rng.dirichlet(np.ones(k) * rng.uniform(0.5, 3.0))
    return np.maximum(p, 1e-12) / np.maximum(p, 1e-12).sum()


def _prop_zscore_zero_mean(rng):
    z, tau = _draw_logits(rng), _draw_tau(rng)
    m = float(np.mean(zscore(z, tau)))
    if abs(m) >= 1e-9:
        return f"mean {m} for z={z.tolist()} tau={tau}"


def _prop_zscore_unit_std(rng):
    z, tau = _draw_logits(rng), _draw_tau(rng)
    s = logit_stats(zscore(z, tau)).std
    if abs(s - 1.0 / tau) >= 1e-9:
        return f"std {s} != 1/tau {1 / tau} for z={z.tolist()} tau={tau}"


def _prop_zscore_bounded(rng):
    z, tau = _draw_logits(rng), _draw_tau(rng)
    bound = np.sqrt(z.size - 1) / tau + 1e-12
    worst = float(np.max(np.abs(zscore(z, tau))))
    if worst > bound:
        return f"|zhat| {worst} > bound {bound} for z={z.tolist()} tau={tau}"


def _prop_zscore_preserves_order(rng):
    z, tau = _draw_logits(rng), _draw_tau(rng)
    if not np.array_equal(np.argsort(zscore(z, tau), kind="stable"), np.argsort(z, kind="stable")):
        return f"order changed for z={z.tolist()} tau={tau}"


def _prop_zscore_affine_invariant(rng):
    z, tau = _draw_logits(rng), _draw_tau(rng)
    a = float(rng.uniform(0.1, 10.0))
    b = float(rng.uniform(-10.0, 10.0))
    diff = float(np.max(np.abs(zscore(a * z + b, tau) - zscore(z, tau))))
    if diff >= 1e-9:
        return f"affine diff {diff} for z={z.tolist()} a={a} b={b} tau={tau}"


def _prop_softmax_shift_invariant(rng):
    z = _draw_logits(rng)
    t = _draw_tau(rng)
    c = float(rng.uniform(-20.0, 20.0))
    diff = float(np.max(np.abs(softmax_t(z + c, t) - softmax_t(z, t))))
    if diff >= 1e-12:
        return f"shift diff {diff} for z={z.tolist()} c={c} T={t}"


def _prop_general_softmax_matches(rng):
    z = _draw_logits(rng)
    a = float(rng.uniform(-20.0, 20.0))
    b = _draw_tau(rng)
    diff = float(np.max(np.abs(general_softmax(z, a, b) - softmax_t(z, b))))
    if diff >= 1e-12:
        return f"diff {diff} for z={z.tolist()} a={a} b={b}"


def _prop_softmax_is_probability(rng):
    z = _draw_logits(rng)
    q = softmax_t(z, _draw_tau(rng))
    if not is_probability_vector(q):
        return f"invalid probability vector {q.tolist()} from z={z.tolist()}"


def _prop_ce_minus_kl_is_entropy(rng):
    k = int(rng.integers(2, 60))
    p, q = _draw_probs(rng, k), _draw_probs(rng, k)
    gap = cross_entropy(p, q) - kl_div(p, q) - entropy(p)
    if abs(gap) >= 1e-9:
        return f"identity gap {gap} at k={k}"


def _prop_kl_grad_equals_ce_grad(rng):
    k = int(rng.integers(2, 40))
    p = _draw_probs(rng, k)
    z = rng.normal(0.0, 2.0, size=k)
    t = _draw_tau(rng)
    diff = float(
        np.max(np.abs(kl_div_grad_student(p, z, t) - cross_entropy_grad_student(p, z, t)))
    )
    if diff >= 1e-12:
        return f"grad diff {diff} at k={k} T={t}"


def _draw_kd_instance(rng):
    k = int(rng.integers(2, 9))
    v = rng.normal(0.0, 2.0, size=k)
    z = rng.normal(0.0, 2.0, size=k)
    while logit_stats(v).std < 1e-3 or logit_stats(z).std < 1e-3:
        v = rng.normal(0.0, 2.0, size=k)
        z = rng.normal(0.0, 2.0, size=k)
    label = int(rng.integers(0, k))
    cfg = KDConfig(
        lambda_ce=float(rng.uniform(0.0, 2.0)),
        lambda_kd=float(rng.uniform(0.1, 9.0)),
        tau=float(rng.uniform(0.5, 5.0)),
        scheme="shared" if rng.integers(2) else "zscore",
    )
    return v, z, label, cfg


def _prop_kd_grad_finite_difference(rng):
    v, z, label, cfg = _draw_kd_instance(rng)
    g = kd_objective_grad(v, z, label, cfg)
    h = 1e-5
    fd = np.zeros_like(z)
    for j in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[j] += h
        zm[j] -= h
        fd[j] = (
            kd_objective(v, zp, label, cfg).total - kd_objective(v, zm, label, cfg).total
        ) / (2 * h)
    rel = float(np.max(np.abs(g - fd)) / max(np.max(np.abs(g)), 1e-8))
    if rel >= 1e-5:
        return f"fd rel err {rel} scheme={cfg.scheme} v={v.tolist()} z={z.tolist()}"


def _prop_shared_kd_grad_sums_to_zero(rng):
    v, z, label, cfg = _draw_kd_instance(rng)
    cfg = KDConfig(lambda_ce=0.0, lambda_kd=cfg.lambda_kd, tau=cfg.tau, scheme="shared")
    total = float(np.sum(kd_objective_grad(v, z, label, cfg)))
    if abs(total) >= 1e-12:
        return f"KD gradient sum {total} for v={v.tolist()} z={z.tolist()}"


def _prop_kd_zero_iff_probs_equal(rng):
    v, z, label, cfg = _draw_kd_instance(rng)
    if rng.integers(2):
        z = v.copy()  # force the equal-probability branch
    kd = kd_objective(v, z, label, cfg).kd
    p = scheme_probabilities(v, cfg)
    q = scheme_probabilities(z, cfg)
    close = float(np.max(np.abs(p - q))) <= 1e-12
    if kd == 0.0 and not close:
        return f"kd exactly 0 but probs differ by {np.max(np.abs(p - q))}"
    if close and kd > 1e-9:
        return f"probs equal within 1e-12 but kd {kd}"


PROPERTIES = [
    ("zscore-zero-mean", _prop_zscore_zero_mean),
    ("zscore-std-is-1-over-tau", _prop_zscore_unit_std),
    ("zscore-bounded-by-sqrt(K-1)-over-tau", _prop_zscore_bounded),
    ("zscore-preserves-order", _prop_zscore_preserves_order),
    ("zscore-positive-affine-invariant", _prop_zscore_affine_invariant),
    ("softmax-shift-invariant", _prop_softmax_shift_invariant),
    ("general-softmax-reduces-to-softmax", _prop_general_softmax_matches),
    ("softmax-outputs-probability-vector", _prop_softmax_is_probability),
    ("cross-entropy-minus-kl-is-entropy", _prop_ce_minus_kl_is_entropy),
    ("kl-grad-equals-ce-grad", _prop_kl_grad_equals_ce_grad),
    ("kd-grad-matches-finite-differences", _prop_kd_grad_finite_difference),
    ("shared-kd-grad-sums-to-zero", _prop_shared_kd_grad_sums_to_zero),
    ("kd-zero-iff-scheme-probs-equal", _prop_kd_zero_iff_probs_equal),
]


def run_property_suite(cases=1000, seed=0):
    """Run every property for `cases` random instances; stop each at first failure."""
    results = []
    for index, (name, prop) in enumerate(PROPERTIES):
        rng = np.random.Generator(np.random.PCG64([seed, index]))
        failure = ""
        done = 0
        for done in range(1, cases + 1):
            detail = prop(rng)
            if detail:
                failure = detail
                break
        results.append(
            PropertyResult(name=name, passed=not failure, cases=done, counterexample=failure)
        )
    return results


def zscore_property_results(results):
    return [r for r in results if r.name.startswith("zscore-")]
