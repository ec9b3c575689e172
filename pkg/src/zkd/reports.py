"""Report serialization: JSON for structure, CSV for plot data.

All writers are deterministic (no timestamps, fixed key order, fixed float
formatting), so identical runs produce byte-identical files.
"""

import os

from . import jsonio


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    """Write a comma-separated table; floats at full precision, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, bool):
                    cells.append("true" if cell else "false")
                elif isinstance(cell, float):
                    cells.append(_fmt(cell))
                else:
                    cells.append(str(cell))
            fh.write(",".join(cells) + "\n")


def loss_breakdown_dicts(epoch_losses):
    return [
        {"epoch": i, "ce_hard": lb.ce_hard, "kd": lb.kd, "total": lb.total}
        for i, lb in enumerate(epoch_losses)
    ]


def distill_report_dict(report):
    return {
        "scheme": report.scheme,
        "seed": report.seed,
        "teacher_acc": report.teacher_acc,
        "student_acc": report.student_acc,
        "epochs": len(report.epoch_losses),
        "final_loss": {
            "ce_hard": report.epoch_losses[-1].ce_hard,
            "kd": report.epoch_losses[-1].kd,
            "total": report.epoch_losses[-1].total,
        },
        "epoch_losses": loss_breakdown_dicts(report.epoch_losses),
        "teacher_logit_stats": {
            "mean_of_means": float(sum(s.mean for s in report.teacher_stats) / len(report.teacher_stats)),
            "mean_of_stds": float(sum(s.std for s in report.teacher_stats) / len(report.teacher_stats)),
        },
        "student_logit_stats": {
            "mean_of_means": float(sum(s.mean for s in report.student_stats) / len(report.student_stats)),
            "mean_of_stds": float(sum(s.std for s in report.student_stats) / len(report.student_stats)),
        },
    }


def write_distill_report(out_dir, report):
    jsonio.dump(distill_report_dict(report), os.path.join(out_dir, "report.json"))
    write_csv(
        os.path.join(out_dir, "losses.csv"),
        ["epoch", "ce_hard", "kd", "total"],
        [(i, lb.ce_hard, lb.kd, lb.total) for i, lb in enumerate(report.epoch_losses)],
    )


def write_logit_stats_csv(path, stats_by_role):
    """Bivariate-histogram data: one row per (sample, role)."""
    rows = []
    for role, stats in stats_by_role.items():
        for i, s in enumerate(stats):
            rows.append((i, s.mean, s.std, role))
    write_csv(path, ["sample_index", "mean", "std", "role"], rows)


def shackle_report_dict(report):
    return {
        "teacher_logits": list(report.teacher_logits),
        "converged_student_logits": list(report.converged_student_logits),
        "delta": report.delta,
        "max_shift_residual": report.max_shift_residual,
        "std_ratio": report.std_ratio,
        "iterations": report.iterations,
        "final_kl": report.final_kl,
    }


def write_shackle_report(out_dir, report):
    jsonio.dump(shackle_report_dict(report), os.path.join(out_dir, "shackle_report.json"))
    write_csv(
        os.path.join(out_dir, "shackle_logits.csv"),
        ["class_index", "teacher_logit", "student_logit", "difference"],
        [
            (i, float(v), float(z), float(z - v))
            for i, (v, z) in enumerate(
                zip(report.teacher_logits, report.converged_student_logits)
            )
        ],
    )


def toy_case_report_dict(report):
    return {
        "teacher_logits": list(report.teacher_logits),
        "tau": report.tau,
        "label": report.label,
        "students": [
            {
                "logits": list(row.student_logits),
                "vanilla_kl": row.vanilla_kl,
                "zscore_kl": row.zscore_kl,
                "predicted": row.predicted,
                "correct": row.correct,
            }
            for row in report.rows
        ],
        "vanilla_preferred": report.vanilla_preferred,
        "zscore_preferred": report.zscore_preferred,
    }


def write_toy_case_report(out_dir, report):
    jsonio.dump(toy_case_report_dict(report), os.path.join(out_dir, "toycase_report.json"))
    write_csv(
        os.path.join(out_dir, "toycase_losses.csv"),
        ["student_index", "vanilla_kl", "zscore_kl", "predicted", "correct"],
        [
            (i, row.vanilla_kl, row.zscore_kl, row.predicted, row.correct)
            for i, row in enumerate(report.rows)
        ],
    )


def format_toy_case_table(report):
    lines = [
        f"teacher logits: {[float(v) for v in report.teacher_logits]}  "
        f"label: {report.label}  tau: {report.tau}",
        f"{'student':>8}  {'vanilla_kl':>14}  {'zscore_kl':>14}  {'predicted':>9}  correct",
    ]
    for i, row in enumerate(report.rows):
        lines.append(
            f"{i:>8}  {row.vanilla_kl:>14.7g}  {row.zscore_kl:>14.7g}  "
            f"{row.predicted:>9}  {str(row.correct).lower()}"
        )
    lines.append(
        f"shared-temperature criterion prefers student {report.vanilla_preferred}; "
        f"z-score criterion prefers student {report.zscore_preferred}"
    )
    return "\n".join(lines)


def write_maxent_report(out_dir, instances, worst_tv):
    jsonio.dump(
        {
            "instances": len(instances),
            "worst_total_variation": worst_tv,
            "results": instances,
        },
        os.path.join(out_dir, "maxent_report.json"),
    )
    write_csv(
        os.path.join(out_dir, "maxent_instances.csv"),
        ["instance", "k", "target", "multiplier", "total_variation"],
        [
            (i, inst["k"], inst["target"], inst["multiplier"], inst["total_variation"])
            for i, inst in enumerate(instances)
        ],
    )
