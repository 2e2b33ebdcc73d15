"""Command line interface.

Subcommands: ``solve`` a single problem, ``ratios`` for the
synchronized-stop prediction study, ``crossover`` for the early-stop
crossover study, and ``generate`` to write instance files.  Any long
option can also be supplied through a plain-text ``key=value`` config
file passed as ``--config``; command-line flags win.

Exit codes: 0 success, 1 usage error, 2 experiment completed with
per-instance failures, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import qpsio
from .gen import GenParams, generate_qts1, generate_qts2
from .harness import (
    DEFAULT_STOPS,
    ExperimentConfig,
    run_crossover_experiment,
    run_ratio_experiment,
)
from .ipm import SolveOptions, solve
from .model import validate_problem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_IO = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qpert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value config file with option defaults")
        p.add_argument("--no-plot", action="store_true",
                       help="skip rendering the companion PNG figure")

    p_solve = sub.add_parser("solve", help="solve one problem and report the trace")
    common(p_solve)
    src = p_solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--qps", help="QPS file to solve")
    src.add_argument("--suite", choices=("qts1", "qts2"), help="generate one instance")
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--perturbation", type=float, default=1e-3,
                         help="initial perturbation (0 disables)")
    p_solve.add_argument("--mu-tol", type=float, default=1e-3)
    p_solve.add_argument("--max-iter", type=int, default=100)
    p_solve.add_argument("--out", help="write the per-iteration trace CSV here")

    for name, helptext in (("ratios", "prediction-ratio study"),
                           ("crossover", "crossover study")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--suite", required=True,
                       help="qts1, qts2 or a directory of .qps files")
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--out", required=True, help="output CSV path")
        p.add_argument("--count", type=int, default=50)
        p.add_argument("--m-range", default="10,60")
        p.add_argument("--n-range", default="60,160")
        p.add_argument("--density", type=float, default=0.5)
        p.add_argument("--scale", type=float, default=10.0)
        p.add_argument("--perturbation", type=float, default=1e-3)
        p.add_argument("--mu-tol", type=float, default=1e-3)
        p.add_argument("--shrink-fraction", type=float, default=None,
                       help="override the perturbation shrink fraction")
        if name == "ratios":
            p.add_argument("--stops", default=",".join(str(k) for k in DEFAULT_STOPS))
            p.add_argument("--mc-truth", action="store_true",
                           help="also score against an interior-point reference")

    p_gen = sub.add_parser("generate", help="write generated instances as QPS files")
    common(p_gen)
    p_gen.add_argument("--suite", choices=("qts1", "qts2"), required=True)
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--count", type=int, default=50)
    p_gen.add_argument("--m-range", default="10,200")
    p_gen.add_argument("--n-range", default="20,500")
    p_gen.add_argument("--density", type=float, default=0.5)
    p_gen.add_argument("--scale", type=float, default=1.0)
    return parser


def _apply_config(parser, argv):
    """Load key=value defaults from --config before the real parse."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a file path")
    path = argv[idx + 1]
    try:
        with open(path, encoding="utf-8") as fh:
            pairs = [line.split("#", 1)[0].strip() for line in fh]
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    injected = []
    for pair in pairs:
        if not pair:
            continue
        if "=" not in pair:
            raise UsageError(f"malformed config line: {pair!r}")
        key, value = pair.split("=", 1)
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on") and flag in ("--no-plot", "--mc-truth"):
            injected.append(flag)
        else:
            injected.extend([flag, value])
    # keep the subcommand first; config-derived options precede explicit
    # flags so the command line wins
    return argv[:2] + injected + argv[2:]


def _int_pair(text):
    parts = [p for p in str(text).replace("(", "").replace(")", "").split(",") if p.strip()]
    if len(parts) != 2:
        raise UsageError(f"expected two comma-separated integers, got {text!r}")
    return int(parts[0]), int(parts[1])


def _solve_options(args, initial=None) -> SolveOptions:
    kwargs = dict(
        initial_perturbation=args.perturbation if initial is None else initial,
        mu_tolerance=args.mu_tol,
    )
    if getattr(args, "max_iter", None):
        kwargs["max_iterations"] = args.max_iter
    if getattr(args, "shrink_fraction", None):
        kwargs["shrink_fraction"] = args.shrink_fraction
    return SolveOptions(**kwargs)


def _experiment_config(args) -> ExperimentConfig:
    stops = tuple(int(s) for s in getattr(args, "stops", "").split(",") if s) \
        if getattr(args, "stops", None) else DEFAULT_STOPS
    return ExperimentConfig(
        suite=args.suite,
        instance_count=args.count,
        base_seed=args.seed,
        stop_iterations=stops,
        options_perturbed=_solve_options(args),
        options_unperturbed=_solve_options(args, initial=0.0),
        output_path=args.out,
        m_range=_int_pair(args.m_range),
        n_range=_int_pair(args.n_range),
        density=args.density,
        scale=args.scale,
        mc_ground_truth=bool(getattr(args, "mc_truth", False)),
    )


def _figure_path(csv_path) -> str:
    stem, _ = os.path.splitext(csv_path)
    return stem + ".png"


def _cmd_solve(args) -> int:
    if args.qps:
        with open(args.qps, encoding="utf-8") as fh:
            raw = qpsio.parse_qps(fh.read())
        qp, _ = qpsio.to_standard_form(raw)
    else:
        gen = generate_qts1 if args.suite == "qts1" else generate_qts2
        qp, _ = gen(GenParams(seed=args.seed, m_range=(10, 60), n_range=(20, 120)))
        validate_problem(qp)
    report = solve(qp, _solve_options(args))
    last = report.trace[-1] if report.trace else None
    print(f"problem {qp.name}: m={qp.m} n={qp.n}")
    print(f"status {report.status} after {report.iterations} iterations")
    if last:
        print(f"final mu_lambda {last.mu_lambda:.3e}, relative residual {last.residual:.3e}")
    print(f"predicted active set size {len(report.predicted_active)}")
    if args.out:
        _write_trace_csv(report, args.out)
        if not args.no_plot and report.trace:
            from . import plots
            plots.solve_figure(report.trace, _figure_path(args.out))
    return EXIT_OK


def _write_trace_csv(report, path) -> None:
    header = "k,mu_lambda,mu,residual,alpha_p,alpha_d,sigma,lambda_inf,n_predicted"
    lines = [header]
    for k, t in enumerate(report.trace, start=1):
        lines.append(
            f"{k},{t.mu_lambda:.17g},{t.mu:.17g},{t.residual:.17g},"
            f"{t.alpha_p:.17g},{t.alpha_d:.17g},{t.sigma:.17g},"
            f"{t.lambda_inf:.17g},{len(t.predicted_active)}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_ratios(args) -> int:
    cfg = _experiment_config(args)
    result = run_ratio_experiment(cfg)
    if not args.no_plot:
        from . import plots
        plots.ratio_figure(result.rows, _figure_path(args.out))
    complete = all(r["n_ok"] == result.instance_total for r in result.rows)
    print(f"wrote {args.out} ({len(result.rows)} stop iterations)")
    if not complete:
        print(f"{result.incomplete_instances} instances missing from some stops",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def _cmd_crossover(args) -> int:
    cfg = _experiment_config(args)
    result = run_crossover_experiment(cfg)
    if not args.no_plot and result.rows:
        from . import plots
        plots.crossover_figure(result.rows, _figure_path(args.out))
    print(f"wrote {args.out} ({len(result.rows)} instances, {result.failures} failures)")
    if result.rows:
        print(f"mean active-set iterations: perturbed {result.average['actvItr_Per']:.1f}, "
              f"unperturbed {result.average['actvItr_Unp']:.1f}")
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _cmd_generate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    gen = generate_qts1 if args.suite == "qts1" else generate_qts2
    for i in range(args.count):
        params = GenParams(seed=args.seed + i, m_range=_int_pair(args.m_range),
                           n_range=_int_pair(args.n_range), density=args.density,
                           scale=args.scale)
        qp, _ = gen(params)
        qpsio.write_qps(qp, os.path.join(args.out, f"{qp.name}.qps"))
    print(f"wrote {args.count} instances to {args.out}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv if argv is None else ["qpert"] + list(argv))
    parser = _build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv[1:])
        handler = {
            "solve": _cmd_solve,
            "ratios": _cmd_ratios,
            "crossover": _cmd_crossover,
            "generate": _cmd_generate,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
