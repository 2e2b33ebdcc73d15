"""Experiment drivers: synchronized-stop prediction-ratio curves and the
early-termination crossover study, over generated suites or a directory
of QPS files.

Both experiments run the perturbed and the unperturbed algorithm on the
same instance from identical starting points.  The ratio study stops both
at each iteration count in a sweep and scores the predicted active set
against a reference optimal active set; the crossover study stops the
perturbed run at the gap tolerance, gives the unperturbed run the same
number of iterations, fixes each predicted-active set at zero and
finishes the reduced problems with the active-set method.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from . import qpsio
from .asqp import ActiveSetError, active_set_solve, extract_subproblem, crossover_scores
from .gen import GenParams, generate_qts1, generate_qts2
from .ipm import CONVERGED, SolveOptions, solve, solve_fixed_iterations
from .model import SET_TOL, StandardQP
from .predict import prediction_ratios

RATIO_HEADER = (
    "stop_iteration", "falsePer", "missPer", "corrPer",
    "falseUnp", "missUnp", "corrUnp", "log10ResPer", "log10ResUnp", "n_ok",
)
RATIO_MC_COLUMNS = (
    "falsePerMc", "missPerMc", "corrPerMc", "falseUnpMc", "missUnpMc", "corrUnpMc",
)

# Default stop sweep of the ratio study.
DEFAULT_STOPS = tuple(range(2, 21, 2))


@dataclass(frozen=True)
class ExperimentConfig:
    suite: str                              # "qts1", "qts2", or a directory of .qps files
    instance_count: int = 50
    seeds: tuple = ()                       # explicit seeds; derived from base_seed if empty
    base_seed: int = 0
    stop_iterations: tuple = DEFAULT_STOPS
    options_perturbed: SolveOptions = field(default_factory=SolveOptions)
    options_unperturbed: SolveOptions = field(
        default_factory=lambda: SolveOptions(initial_perturbation=0.0))
    output_path: str = ""
    m_range: tuple = (10, 60)
    n_range: tuple = (60, 160)
    density: float = 0.5
    # magnitude of the generated (x, s) entries; large enough that the
    # perturbed bounds get crossed before the gap-tolerance stop
    scale: float = 10.0
    mc_ground_truth: bool = False           # also score against an interior reference
    lp_identity_h: str = "auto"             # "auto" | "always" | "never"

    def __post_init__(self):
        if self.instance_count < 1:
            raise ValueError("instance_count must be at least 1")
        stops = tuple(self.stop_iterations)
        if any(b <= a for a, b in zip(stops, stops[1:])):
            raise ValueError("stop_iterations must be strictly increasing")

    def resolved_seeds(self) -> tuple:
        if self.seeds:
            return tuple(int(s) for s in self.seeds)
        return tuple(self.base_seed + i for i in range(self.instance_count))


@dataclass(frozen=True)
class Instance:
    name: str
    qp: StandardQP
    solution: object = None        # generator-known optimal triple, when available


@dataclass(frozen=True)
class RatioResult:
    rows: tuple                    # one dict per stop iteration
    incomplete_instances: int      # instances missing from at least one stop
    instance_total: int            # instances the experiment attempted


@dataclass(frozen=True)
class CrossoverResult:
    rows: tuple                    # per-instance report records
    average: dict
    pctl90: dict
    failures: int


def load_instances(cfg: ExperimentConfig):
    """Materialize the instance list for a config (deterministic order)."""
    if cfg.suite == "qts1":
        out = []
        for seed in cfg.resolved_seeds():
            params = GenParams(seed=seed, m_range=cfg.m_range, n_range=cfg.n_range,
                               density=cfg.density, scale=cfg.scale)
            qp, _ = generate_qts1(params)
            out.append(Instance(name=qp.name, qp=qp))
        return out
    if cfg.suite == "qts2":
        out = []
        for seed in cfg.resolved_seeds():
            params = GenParams(seed=seed, m_range=cfg.m_range, n_range=cfg.n_range,
                               density=cfg.density, scale=cfg.scale)
            qp, sol = generate_qts2(params)
            out.append(Instance(name=qp.name, qp=qp, solution=sol))
        return out
    if not os.path.isdir(cfg.suite):
        raise ValueError(f"suite must be qts1, qts2 or a directory: {cfg.suite!r}")
    out = []
    for fname in sorted(os.listdir(cfg.suite)):
        if not fname.lower().endswith(".qps"):
            continue
        with open(os.path.join(cfg.suite, fname), encoding="utf-8") as fh:
            raw = qpsio.parse_qps(fh.read())
        qp, mapping = qpsio.to_standard_form(raw)
        qp = _maybe_add_identity(qp, mapping, cfg.lp_identity_h)
        out.append(Instance(name=qp.name or fname, qp=qp))
    if not out:
        raise ValueError(f"no .qps files found in {cfg.suite!r}")
    return out


def _maybe_add_identity(qp: StandardQP, mapping, mode: str) -> StandardQP:
    """LP files get an identity quadratic on the original (non-slack) columns."""
    if mode == "never":
        return qp
    if mode == "auto" and np.any(qp.H):
        return qp
    H = qp.H.copy()
    orig = np.asarray(mapping.original_columns, dtype=int)
    H[orig, orig] += 1.0
    return replace(qp, H=H)


def reference_active_set(qp: StandardQP, solution=None) -> tuple:
    """Ground-truth active set {i : x*_i < SET_TOL} and the reference optimum.

    Uses the generator-known solution when available, otherwise the
    active-set solver's optimum.
    """
    if solution is not None:
        x_ref = solution.x
    else:
        x_ref, _ = active_set_solve(qp)
    active = frozenset(np.flatnonzero(x_ref < SET_TOL).tolist())
    return active, x_ref


def _mc_active_set(qp: StandardQP) -> frozenset | None:
    """Interior-style reference: unperturbed run pushed to mu < 1e-8."""
    opts = SolveOptions(initial_perturbation=0.0, mu_tolerance=1e-8, max_iterations=200)
    rep = solve(qp, opts)
    if rep.status != CONVERGED:
        return None
    return frozenset(np.flatnonzero(rep.final_iterate.x < SET_TOL).tolist())


def run_ratio_experiment(cfg: ExperimentConfig) -> RatioResult:
    """Average prediction ratios per stop iteration, both algorithms."""
    stops = tuple(cfg.stop_iterations)
    k_max = stops[-1]
    per_stop = {K: [] for K in stops}
    incomplete = set()

    instances = load_instances(cfg)
    for inst in instances:
        try:
            truth, _ = reference_active_set(inst.qp, inst.solution)
        except ActiveSetError:
            incomplete.add(inst.name)
            continue
        mc_truth = _mc_active_set(inst.qp) if cfg.mc_ground_truth else None
        rep_per = solve_fixed_iterations(inst.qp, cfg.options_perturbed, k_max)
        rep_unp = solve_fixed_iterations(inst.qp, cfg.options_unperturbed, k_max)
        if len(rep_per.trace) < k_max or len(rep_unp.trace) < k_max:
            incomplete.add(inst.name)
        else:
            # both arms must have run the same, full iteration count
            assert len(rep_per.trace) == len(rep_unp.trace) == k_max
        for K in stops:
            if len(rep_per.trace) < K or len(rep_unp.trace) < K:
                continue
            tp, tu = rep_per.trace[K - 1], rep_unp.trace[K - 1]
            sample = {
                "per": prediction_ratios(tp.predicted_active, truth),
                "unp": prediction_ratios(tu.predicted_active, truth),
                "res_per": tp.residual,
                "res_unp": tu.residual,
            }
            if mc_truth is not None:
                sample["per_mc"] = prediction_ratios(tp.predicted_active, mc_truth)
                sample["unp_mc"] = prediction_ratios(tu.predicted_active, mc_truth)
            per_stop[K].append(sample)

    rows = []
    for K in stops:
        samples = per_stop[K]
        row = {"stop_iteration": K, "n_ok": len(samples)}
        if samples:
            row.update({
                "falsePer": _mean(s["per"].false_prediction for s in samples),
                "missPer": _mean(s["per"].missed_prediction for s in samples),
                "corrPer": _mean(s["per"].correction for s in samples),
                "falseUnp": _mean(s["unp"].false_prediction for s in samples),
                "missUnp": _mean(s["unp"].missed_prediction for s in samples),
                "corrUnp": _mean(s["unp"].correction for s in samples),
                "log10ResPer": math.log10(max(_mean(s["res_per"] for s in samples), 1e-300)),
                "log10ResUnp": math.log10(max(_mean(s["res_unp"] for s in samples), 1e-300)),
            })
            if cfg.mc_ground_truth and "per_mc" in samples[0]:
                row.update({
                    "falsePerMc": _mean(s["per_mc"].false_prediction for s in samples),
                    "missPerMc": _mean(s["per_mc"].missed_prediction for s in samples),
                    "corrPerMc": _mean(s["per_mc"].correction for s in samples),
                    "falseUnpMc": _mean(s["unp_mc"].false_prediction for s in samples),
                    "missUnpMc": _mean(s["unp_mc"].missed_prediction for s in samples),
                    "corrUnpMc": _mean(s["unp_mc"].correction for s in samples),
                })
        else:
            row.update({k: None for k in RATIO_HEADER if k not in ("stop_iteration", "n_ok")})
        rows.append(row)

    if cfg.output_path:
        write_ratio_csv(rows, cfg.output_path, with_mc=cfg.mc_ground_truth)
    return RatioResult(rows=tuple(rows), incomplete_instances=len(incomplete),
                       instance_total=len(instances))


def _mean(values) -> float:
    values = list(values)
    return float(sum(values) / len(values))


def write_ratio_csv(rows, path, with_mc: bool = False) -> None:
    header = RATIO_HEADER + (RATIO_MC_COLUMNS if with_mc else ())
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for col in header:
            val = row.get(col)
            if val is None:
                cells.append("")
            elif col in ("stop_iteration", "n_ok"):
                cells.append(str(int(val)))
            else:
                cells.append(f"{float(val):.6f}")
        lines.append(",".join(cells))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write ratio report to {path}: {exc}") from exc


def _crossover_arm(qp: StandardQP, active, x_warm) -> tuple:
    """Solve the predicted sub-problem warm-started from the interior-point
    iterate; wrong predictions fall back to the nonnegative least-squares
    point so the feasibility error reports the damage instead of aborting
    the instance."""
    kept = [i for i in range(qp.n) if i not in active]
    try:
        sub = extract_subproblem(qp, active)
        if sub.qp is None:
            return np.zeros(0), 0
        return active_set_solve(sub.qp, start=x_warm[kept])
    except ActiveSetError as exc:
        if exc.status != "infeasible":
            raise
    except ValueError:
        pass
    if not kept:
        return np.zeros(0), 0
    x_sub, _ = scipy.optimize.nnls(qp.A[:, kept], qp.b)
    return x_sub, 0


def run_crossover_experiment(cfg: ExperimentConfig) -> CrossoverResult:
    """Early-termination crossover comparison; emits the 12-column report."""
    records = []
    failures = 0

    for inst in load_instances(cfg):
        try:
            rep_per = solve(inst.qp, cfg.options_perturbed)
            if rep_per.status != CONVERGED:
                failures += 1
                continue
            K = rep_per.iterations
            rep_unp = solve_fixed_iterations(inst.qp, cfg.options_unperturbed, K)
            if len(rep_unp.trace) != K:
                failures += 1
                continue
            x_ref, _ = active_set_solve(inst.qp)
            row = {"Probs": inst.name, "m": inst.qp.m, "n": inst.qp.n,
                   "mu_lambda_K": rep_per.trace[-1].mu_lambda,
                   "mu_K": rep_unp.trace[-1].mu,
                   "IPM_Itr": K}
            for tag, rep in (("Per", rep_per), ("Unp", rep_unp)):
                active = rep.predicted_active
                x_sub, iters = _crossover_arm(inst.qp, active, rep.final_iterate.x)
                score = crossover_scores(inst.qp, active, x_sub, x_ref, iterations=iters)
                row[f"actvItr_{tag}"] = score.active_set_iterations
                row[f"feaErr_{tag}"] = score.feasibility_error
                row[f"relObjErr_{tag}"] = score.objective_error
            records.append(row)
        except (ActiveSetError, np.linalg.LinAlgError):
            failures += 1

    average = {"Probs": "Average", "m": None, "n": None}
    pctl90 = {"Probs": "90thPctl", "m": None, "n": None, "mu_lambda_K": None,
              "mu_K": None, "IPM_Itr": None, "actvItr_Per": None, "actvItr_Unp": None}
    if records:
        for col in ("mu_lambda_K", "mu_K", "IPM_Itr", "actvItr_Per", "actvItr_Unp",
                    "feaErr_Per", "feaErr_Unp", "relObjErr_Per", "relObjErr_Unp"):
            average[col] = _mean(r[col] for r in records)
        for col in ("feaErr_Per", "feaErr_Unp", "relObjErr_Per", "relObjErr_Unp"):
            pctl90[col] = float(np.percentile([r[col] for r in records], 90))
    else:
        for col in qpsio.TABLE_C_HEADER[3:]:
            average[col] = None
            pctl90.setdefault(col, None)

    if cfg.output_path:
        qpsio.write_report_csv(list(records) + [average, pctl90], cfg.output_path)
    return CrossoverResult(rows=tuple(records), average=average, pctl90=pctl90,
                           failures=failures)
