"""Matplotlib figure rendering for the report paths.

Figures land next to the CSV files they visualize. matplotlib is imported
lazily with the Agg backend so console-only commands never pay the import.
"""


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path):
    fig.savefig(path, dpi=120)
    _plt().close(fig)


def loss_curves(path, epoch_losses):
    plt = _plt()
    epochs = range(len(epoch_losses))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, [lb.total for lb in epoch_losses], label="total", lw=1.8)
    ax.plot(epochs, [lb.ce_hard for lb in epoch_losses], label="hard-label CE", lw=1.2)
    ax.plot(epochs, [lb.kd for lb in epoch_losses], label="KD (unweighted)", lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_yscale("log")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def logit_stats_scatter(path, stats_by_role):
    """Per-sample (mean, std) scatter, one color per role."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 5))
    for role, stats in stats_by_role.items():
        ax.scatter(
            [s.mean for s in stats],
            [s.std for s in stats],
            s=8,
            alpha=0.55,
            label=role,
        )
    ax.set_xlabel("per-sample logit mean")
    ax.set_ylabel("per-sample logit std")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def shackle_bars(path, report):
    plt = _plt()
    k = len(report.teacher_logits)
    x = range(k)
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.38
    ax.bar([i - width / 2 for i in x], report.teacher_logits, width, label="teacher")
    ax.bar(
        [i + width / 2 for i in x],
        report.converged_student_logits,
        width,
        label="student at convergence",
    )
    ax.axhline(0, color="black", lw=0.6)
    ax.set_xlabel("class index")
    ax.set_ylabel("logit")
    ax.set_title(f"constant shift delta = {report.delta:.5g}")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, path)


def toy_case_bars(path, report):
    from .logits import zscore

    plt = _plt()
    k = len(report.teacher_logits)
    x = list(range(k))
    n = 1 + len(report.rows)
    width = 0.8 / n
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, standardized in zip(axes, (False, True)):
        series = [("teacher", report.teacher_logits)]
        series += [(f"student {i}", row.student_logits) for i, row in enumerate(report.rows)]
        for j, (name, logits) in enumerate(series):
            vals = zscore(logits, report.tau) if standardized else logits
            ax.bar([i + (j - (n - 1) / 2) * width for i in x], vals, width, label=name)
        ax.axhline(0, color="black", lw=0.6)
        ax.set_xlabel("class index")
        ax.set_ylabel("standardized logit" if standardized else "raw logit")
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def maxent_scatter(path, pairs):
    """Dual vs primal probabilities pooled over instances; ideal is y = x."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 5))
    xs = [p for p, _ in pairs]
    ys = [q for _, q in pairs]
    lim = max(xs + ys + [1e-3]) * 1.05
    ax.plot([0, lim], [0, lim], color="gray", lw=0.8)
    ax.scatter(xs, ys, s=10, alpha=0.6)
    ax.set_xlabel("dual (bisection) probability")
    ax.set_ylabel("primal (projected ascent) probability")
    fig.tight_layout()
    _save(fig, path)
