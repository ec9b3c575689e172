"""Command-line interface.

Subcommands: props, maxent, shackles, toycase, distill, stats. Every
subcommand is deterministic given its flags and seeds; report files (JSON,
CSV) from identical invocations are byte-identical. Figures (PNG) are
rendered next to the delimited output they visualize.

Exit codes: 0 success, 1 runtime or verification failure, 2 usage/config
errors.
"""

import argparse
import dataclasses
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import figures, jsonio, reports
from .config import load_run_config, load_shackle_config
from .data import generate, load_csv, save_csv
from .errors import CheckpointError, ConfigError, ConvergenceError, CsvParseError
from .experiments import (
    distill,
    logit_statistics,
    shackle_study,
    standardized_statistics,
    toy_case,
    toy_students,
    train_teacher,
    TOY_TEACHER,
)
from .maxent import MaxEntProblem, primal_maxent_oracle, solve_multiplier
from .nn import load_checkpoint, save_checkpoint
from .properties import run_property_suite

MAXENT_AGREEMENT_TOL = 1e-6


def _resolve_out(args, config_out=""):
    if args.out:
        return args.out
    if config_out:
        return config_out
    return os.environ.get("ZKD_OUT", "out")


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _parse_vector(text, flag):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if len(values) < 2:
        raise ConfigError(f"{flag} needs at least two entries, got {text!r}")
    return np.array(values)


def cmd_props(args):
    results = run_property_suite(cases=args.cases, seed=args.seed)
    failed = 0
    for r in results:
        if r.passed:
            print(f"PASS {r.name} ({r.cases} cases)")
        else:
            failed += 1
            print(f"FAIL {r.name} (case {r.cases}): {r.counterexample}")
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return 0 if failed == 0 else 1


def cmd_maxent(args):
    out = _ensure_dir(_resolve_out(args))
    rng = np.random.Generator(np.random.PCG64(args.seed))
    instances = []
    pairs = []
    worst = 0.0
    for _ in range(args.cases):
        z = rng.normal(0.0, 1.0, size=args.k)
        while z.max() - z.min() < 0.1:
            z = rng.normal(0.0, 1.0, size=args.k)
        w = float(rng.uniform(-0.5, 0.5))
        mean = z.mean()
        target = mean + w * ((z.max() - mean) if w >= 0 else (mean - z.min()))
        problem = MaxEntProblem(logits=z, target_expectation=float(target))
        dual = solve_multiplier(problem, tol=1e-12)
        primal = primal_maxent_oracle(problem, tol=1e-8)
        tv = 0.5 * float(np.abs(dual.distribution - primal).sum())
        worst = max(worst, tv)
        pairs.extend(zip(dual.distribution.tolist(), primal.tolist()))
        instances.append(
            {
                "k": args.k,
                "states": z.tolist(),
                "target": float(target),
                "multiplier": dual.multiplier,
                "entropy": dual.entropy,
                "total_variation": tv,
            }
        )
    reports.write_maxent_report(out, instances, worst)
    figures.maxent_scatter(os.path.join(out, "maxent_agreement.png"), pairs)
    ok = worst <= MAXENT_AGREEMENT_TOL
    print(
        f"maxent: {args.cases} instances at k={args.k}; worst dual-vs-primal "
        f"total variation {worst:.3e} ({'OK' if ok else 'MISMATCH'})"
    )
    print(f"wrote {out}/maxent_report.json, maxent_instances.csv, maxent_agreement.png")
    return 0 if ok else 1


def cmd_shackles(args):
    if args.config:
        cfg = load_shackle_config(args.config)
        teacher, temperature, init = np.array(cfg.teacher), cfg.temperature, np.array(cfg.init)
        lr = cfg.lr if cfg.lr > 0 else None
        max_iters, tol = cfg.max_iters, cfg.tol
    else:
        if args.teacher is None or args.T is None or args.init is None:
            raise ConfigError("shackles needs either --config or all of --teacher, --T, --init")
        teacher = _parse_vector(args.teacher, "--teacher")
        init = _parse_vector(args.init, "--init")
        temperature, lr = args.T, args.lr
        max_iters, tol = args.max_iters, args.tol
    out = _ensure_dir(_resolve_out(args))
    report = shackle_study(teacher, temperature, init, lr=lr, max_iters=max_iters, tol=tol)
    reports.write_shackle_report(out, report)
    figures.shackle_bars(os.path.join(out, "shackle_logits.png"), report)
    print(
        f"shackles: converged in {report.iterations} iterations; "
        f"delta {report.delta:.7g}, max shift residual {report.max_shift_residual:.3e}, "
        f"std ratio {report.std_ratio:.7g}, final KL {report.final_kl:.3e}"
    )
    print(f"wrote {out}/shackle_report.json, shackle_logits.csv, shackle_logits.png")
    return 0


def cmd_toycase(args):
    teacher = _parse_vector(args.teacher, "--teacher") if args.teacher else np.array(TOY_TEACHER)
    if args.student:
        students = [_parse_vector(s, "--student") for s in args.student]
    elif args.teacher:
        raise ConfigError("--teacher given without any --student")
    else:
        students = toy_students()
    for s in students:
        if s.shape != teacher.shape:
            raise ConfigError(
                f"student logits {s.tolist()} have {s.size} entries, teacher has {teacher.size}"
            )
    report = toy_case(teacher, students, args.tau, label=args.label)
    print(reports.format_toy_case_table(report))
    out = _ensure_dir(_resolve_out(args))
    reports.write_toy_case_report(out, report)
    figures.toy_case_bars(os.path.join(out, "toycase_logits.png"), report)
    print(f"wrote {out}/toycase_report.json, toycase_losses.csv, toycase_logits.png")
    return 0


def _distill_one_seed(run, teacher, train, test, seed, out_dir):
    train_cfg = dataclasses.replace(run.distill_train, seed=seed)
    student, report = distill(teacher, train, test, run.student, run.kd, train_cfg)
    _ensure_dir(out_dir)
    reports.write_distill_report(out_dir, report)
    stats_by_role = {
        "teacher": report.teacher_stats,
        "student": report.student_stats,
        "teacher_standardized": standardized_statistics(teacher, test, run.kd.tau).per_sample,
        "student_standardized": standardized_statistics(student, test, run.kd.tau).per_sample,
    }
    reports.write_logit_stats_csv(os.path.join(out_dir, "logit_stats.csv"), stats_by_role)
    figures.loss_curves(os.path.join(out_dir, "losses.png"), report.epoch_losses)
    figures.logit_stats_scatter(os.path.join(out_dir, "logit_stats.png"), stats_by_role)
    save_checkpoint(student, os.path.join(out_dir, "student_checkpoint.json"))
    return report


def cmd_distill(args):
    run = load_run_config(args.config)
    out = _ensure_dir(_resolve_out(args, run.out_dir))
    train, test = generate(run.data)
    teacher, teacher_acc = train_teacher(train, test, run.teacher, run.teacher_train)
    save_checkpoint(teacher, os.path.join(out, "teacher_checkpoint.json"))
    save_csv(test, os.path.join(out, "test_data.csv"))

    seeds = list(run.seeds) if run.seeds else [run.distill_train.seed]
    multi = len(seeds) > 1
    jobs = max(1, args.jobs)

    def run_seed(seed):
        sub = os.path.join(out, f"seed_{seed}") if multi else out
        return seed, _distill_one_seed(run, teacher, train, test, seed, sub)

    if jobs > 1 and multi:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(run_seed, seeds))
    else:
        results = dict(run_seed(s) for s in seeds)

    accs = [results[s].student_acc for s in seeds]
    summary = {
        "scheme": run.kd.scheme,
        "teacher_acc": teacher_acc,
        "seeds": seeds,
        "student_accs": accs,
        "mean_student_acc": float(np.mean(accs)),
    }
    jsonio.dump(summary, os.path.join(out, "distill_summary.json"))
    print(f"teacher acc {teacher_acc:.4f}")
    for s in seeds:
        print(f"seed {s}: student acc {results[s].student_acc:.4f} ({run.kd.scheme})")
    if multi:
        print(f"mean student acc {summary['mean_student_acc']:.4f}")
    print(f"wrote reports under {out}")
    return 0


def cmd_stats(args):
    net = load_checkpoint(args.checkpoint)
    dataset = load_csv(args.data)
    if dataset.dim != net.spec.input_dim:
        raise ConfigError(
            f"data has {dataset.dim} features but the checkpoint expects {net.spec.input_dim}"
        )
    out = _ensure_dir(_resolve_out(args))
    summary = logit_statistics(net, dataset)
    stats_by_role = {
        "model": summary.per_sample,
        "model_standardized": standardized_statistics(net, dataset, args.tau).per_sample,
    }
    reports.write_logit_stats_csv(os.path.join(out, "logit_stats.csv"), stats_by_role)
    figures.logit_stats_scatter(os.path.join(out, "logit_stats.png"), stats_by_role)
    print(
        f"{dataset.num_samples} samples: mean of logit means {summary.mean_of_means:.6g}, "
        f"mean of logit stds {summary.mean_of_stds:.6g}"
    )
    print(f"wrote {out}/logit_stats.csv, logit_stats.png")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base random seed")
    common.add_argument("--out", default="", help="output directory (default: $ZKD_OUT or ./out)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for seed fan-out")

    parser = argparse.ArgumentParser(
        prog="zkd",
        description="Z-score logit standardization for knowledge distillation: "
        "verification suites and desk-scale experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("props", parents=[common], help="run the randomized property suite")
    p.add_argument("--cases", type=int, default=1000, help="random cases per property")
    p.set_defaults(fn=cmd_props)

    p = sub.add_parser("maxent", parents=[common], help="dual-vs-primal entropy maximization check")
    p.add_argument("--k", type=int, default=5, help="number of states per instance")
    p.add_argument("--cases", type=int, default=50, help="number of random instances")
    p.set_defaults(fn=cmd_maxent)

    p = sub.add_parser("shackles", parents=[common], help="shared-temperature logit shift study")
    p.add_argument("--config", help="JSON config (teacher, temperature, init, lr, max_iters, tol)")
    p.add_argument("--teacher", help='teacher logits, e.g. "2,0,-1"')
    p.add_argument("--T", "--temperature", dest="T", type=float, help="shared temperature")
    p.add_argument("--init", help='initial student logits, e.g. "0,0,0"')
    p.add_argument("--lr", type=float, default=None, help="step size (default 0.5*T^2)")
    p.add_argument("--max-iters", type=int, default=1_000_000)
    p.add_argument("--tol", type=float, default=1e-8, help="gradient inf-norm tolerance")
    p.set_defaults(fn=cmd_shackles)

    p = sub.add_parser("toycase", parents=[common], help="shared-T vs z-score loss comparison")
    p.add_argument("--teacher", help='teacher logits, e.g. "2.5,2.25,-4.75"')
    p.add_argument("--student", action="append", help="student logits (repeatable)")
    p.add_argument("--tau", type=float, default=2.0, help="base temperature")
    p.add_argument("--label", type=int, default=None, help="true class (default: teacher argmax)")
    p.set_defaults(fn=cmd_toycase)

    p = sub.add_parser("distill", parents=[common], help="train a teacher and distill a student")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.set_defaults(fn=cmd_distill)

    p = sub.add_parser("stats", parents=[common], help="per-sample logit statistics of a checkpoint")
    p.add_argument("--checkpoint", required=True, help="model checkpoint JSON")
    p.add_argument("--data", required=True, help="feature/label CSV")
    p.add_argument("--tau", type=float, default=2.0, help="base temperature for standardized stats")
    p.set_defaults(fn=cmd_stats)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, CsvParseError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConvergenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
