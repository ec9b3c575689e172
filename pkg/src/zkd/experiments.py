"""Runnable experiments: distillation training, the shared-temperature
shackle study, the toy-case loss comparison, and per-sample logit statistics.

Every experiment is deterministic given its configs and seeds: batch order
comes from a PCG64 generator seeded by TrainConfig.seed, parameter init from
MlpSpec.seed, and nothing reads wall-clock or global RNG state.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConvergenceError
from .logits import LogitStats, argmax_index, logit_stats, softmax_t, zscore
from .losses import KDConfig, LossBreakdown, kd_objective_batch, kl_div
from .nn import Mlp, MlpSpec


@dataclass(frozen=True)
class LrSchedule:
    kind: str = "constant"  # "constant" or "step"
    factor: float = 0.5
    every: int = 10

    def __post_init__(self):
        if self.kind not in ("constant", "step"):
            raise ValueError(f"lr schedule kind must be constant or step, got {self.kind!r}")
        if self.kind == "step":
            if not 0 < self.factor <= 1:
                raise ValueError("step factor must be in (0, 1]")
            if self.every < 1:
                raise ValueError("step interval must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 0.1
    lr_schedule: LrSchedule = field(default_factory=LrSchedule)
    seed: int = 0
    eps_guard: float = 1e-8  # std floor for standardization, training paths only

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.eps_guard < 0:
            raise ValueError("eps_guard must be >= 0")

    def lr_at(self, epoch):
        if self.lr_schedule.kind == "constant":
            return self.lr
        return self.lr * self.lr_schedule.factor ** (epoch // self.lr_schedule.every)


@dataclass(frozen=True)
class DistillReport:
    scheme: str
    seed: int
    teacher_acc: float
    student_acc: float
    epoch_losses: list  # LossBreakdown per epoch, mean over training samples
    teacher_stats: list  # LogitStats per test sample
    student_stats: list


@dataclass(frozen=True)
class ShackleReport:
    teacher_logits: np.ndarray
    converged_student_logits: np.ndarray
    delta: float
    max_shift_residual: float
    std_ratio: float
    iterations: int
    final_kl: float


@dataclass(frozen=True)
class ToyCaseRow:
    student_logits: np.ndarray
    vanilla_kl: float
    zscore_kl: float
    predicted: int
    correct: bool


@dataclass(frozen=True)
class ToyCaseReport:
    teacher_logits: np.ndarray
    tau: float
    label: int
    rows: list
    vanilla_preferred: int  # row index with the smallest shared-temperature KL
    zscore_preferred: int


@dataclass(frozen=True)
class LogitStatsSummary:
    per_sample: list  # LogitStats, one per sample
    mean_of_means: float
    mean_of_stds: float


def accuracy(net, dataset):
    logits = net.forward(dataset.features)
    return float(np.mean(np.argmax(logits, axis=1) == dataset.labels))


def _run_sgd(student, train, kd_cfg, train_cfg, teacher=None):
    """Mini-batch SGD on the combined objective; returns per-epoch mean losses.

    With lambda_kd == 0 the teacher is never evaluated and the arithmetic
    touching the student is exactly that of plain hard-label CE training, so
    trajectories coincide bit-for-bit.
    """
    use_kd = kd_cfg.lambda_kd > 0.0
    if use_kd and teacher is None:
        raise ValueError("distillation with lambda_kd > 0 requires a teacher")
    if teacher is not None and teacher.spec.output_dim != student.spec.output_dim:
        raise ValueError(
            f"teacher predicts {teacher.spec.output_dim} classes, "
            f"student {student.spec.output_dim}"
        )
    if student.spec.output_dim != train.num_classes:
        raise ValueError(
            f"student predicts {student.spec.output_dim} classes, data has {train.num_classes}"
        )
    rng = np.random.Generator(np.random.PCG64(train_cfg.seed))
    n = train.num_samples
    epoch_losses = []
    for epoch in range(train_cfg.epochs):
        lr = train_cfg.lr_at(epoch)
        order = rng.permutation(n)
        ce_sum = kd_sum = total_sum = 0.0
        for start in range(0, n, train_cfg.batch_size):
            idx = order[start : start + train_cfg.batch_size]
            xb = train.features[idx]
            yb = train.labels[idx]
            zb = student.forward(xb)
            vb = teacher.forward(xb) if use_kd else None
            batch = kd_objective_batch(vb, zb, yb, kd_cfg, eps_guard=train_cfg.eps_guard)
            ce_sum += float(batch.ce_hard.sum())
            kd_sum += float(batch.kd.sum())
            total_sum += float(batch.total.sum())
            grads = student.backward(xb, batch.d_logits / idx.size)
            student.sgd_step(grads, lr)
        epoch_losses.append(
            LossBreakdown(ce_hard=ce_sum / n, kd=kd_sum / n, total=total_sum / n)
        )
    return epoch_losses


def train_teacher(train, test, spec, train_cfg):
    """Hard-label CE training from a fresh init; returns (net, test accuracy)."""
    net = Mlp.init(spec)
    ce_only = KDConfig(lambda_ce=1.0, lambda_kd=0.0, tau=1.0, scheme="shared")
    _run_sgd(net, train, ce_only, train_cfg)
    return net, accuracy(net, test)


def train_student_ce(train, test, spec, train_cfg):
    """Plain CE training of a student; identical engine to train_teacher."""
    return train_teacher(train, test, spec, train_cfg)


def distill(teacher, train, test, student_spec, kd_cfg, train_cfg):
    """Distill a frozen teacher into a fresh student; returns (student, report)."""
    student = Mlp.init(student_spec)
    epoch_losses = _run_sgd(student, train, kd_cfg, train_cfg, teacher=teacher)
    report = DistillReport(
        scheme=kd_cfg.scheme,
        seed=train_cfg.seed,
        teacher_acc=accuracy(teacher, test),
        student_acc=accuracy(student, test),
        epoch_losses=epoch_losses,
        teacher_stats=logit_statistics(teacher, test).per_sample,
        student_stats=logit_statistics(student, test).per_sample,
    )
    return student, report


def shackle_study(teacher_logits, temperature, init, lr=None, max_iters=1_000_000, tol=1e-8):
    """Descend KL(q_T(teacher) || q_T(z)) directly on the student logits z.

    The KD gradient under a shared temperature sums to zero, so mean(z) stays
    at mean(init) for the whole run; the minimizer is teacher + constant. The
    report captures that shift and the std ratio at convergence.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    v = np.asarray(teacher_logits, dtype=np.float64)
    z = np.array(init, dtype=np.float64)
    if v.shape != z.shape:
        raise ValueError(f"teacher and init shapes differ: {v.shape} vs {z.shape}")
    if lr is None:
        lr = 0.5 * temperature**2
    p = softmax_t(v, temperature)
    iterations = 0
    for iterations in range(max_iters + 1):
        grad = (softmax_t(z, temperature) - p) / temperature
        if np.max(np.abs(grad)) <= tol:
            break
        if iterations == max_iters:
            raise ConvergenceError(
                f"shackle optimization not converged after {max_iters} iterations",
                last_state=z,
            )
        z -= lr * grad

    delta = float(z.mean() - v.mean())
    return ShackleReport(
        teacher_logits=v,
        converged_student_logits=z,
        delta=delta,
        max_shift_residual=float(np.max(np.abs(z - v - delta))),
        std_ratio=logit_stats(z).std / logit_stats(v).std,
        iterations=iterations,
        final_kl=kl_div(p, softmax_t(z, temperature)),
    )


def toy_case(teacher_logits, students, tau, label=None):
    """Compare students under the shared-temperature and z-score KL criteria.

    For each student: KL at shared temperature tau on raw logits, KL after
    standardizing both sides, the predicted class, and whether it matches the
    label (defaults to the teacher's own argmax).
    """
    v = np.asarray(teacher_logits, dtype=np.float64)
    if label is None:
        label = argmax_index(v)
    p_vanilla = softmax_t(v, tau)
    p_zscore = softmax_t(zscore(v, tau), 1.0)
    rows = []
    for s in students:
        s = np.asarray(s, dtype=np.float64)
        predicted = argmax_index(s)
        rows.append(
            ToyCaseRow(
                student_logits=s,
                vanilla_kl=kl_div(p_vanilla, softmax_t(s, tau)),
                zscore_kl=kl_div(p_zscore, softmax_t(zscore(s, tau), 1.0)),
                predicted=predicted,
                correct=predicted == label,
            )
        )
    return ToyCaseReport(
        teacher_logits=v,
        tau=tau,
        label=label,
        rows=rows,
        vanilla_preferred=int(np.argmin([r.vanilla_kl for r in rows])),
        zscore_preferred=int(np.argmin([r.zscore_kl for r in rows])),
    )


# Default toy-case logits. The teacher's top two classes sit close together,
# so a student that swaps them (wrong prediction) costs little raw-logit KL,
# while the rank-preserving student at half scale costs a lot; the z-score
# criterion reverses that ordering.
TOY_TEACHER = (2.5, 2.25, -4.75)
TOY_STUDENT_WRONG_RANK = (2.25, 2.5, -4.75)


def toy_students(teacher_logits=TOY_TEACHER):
    v = np.asarray(teacher_logits, dtype=np.float64)
    return [np.array(TOY_STUDENT_WRONG_RANK), 0.5 * v + 1.0]


def logit_statistics(net, dataset):
    """Per-sample logit mean/std plus their averages, for histogram plotting."""
    logits = net.forward(dataset.features)
    per_sample = [logit_stats(row) for row in logits]
    return LogitStatsSummary(
        per_sample=per_sample,
        mean_of_means=float(np.mean([s.mean for s in per_sample])),
        mean_of_stds=float(np.mean([s.std for s in per_sample])),
    )


def standardized_statistics(net, dataset, tau):
    """Logit statistics after z-score standardization of each sample's logits."""
    logits = net.forward(dataset.features)
    per_sample = [logit_stats(zscore(row, tau)) for row in logits]
    return LogitStatsSummary(
        per_sample=per_sample,
        mean_of_means=float(np.mean([s.mean for s in per_sample])),
        mean_of_stds=float(np.mean([s.std for s in per_sample])),
    )
