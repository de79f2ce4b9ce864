"""Command-line front end: certify, simulate, margin, oracles.

Exit codes are the machine contract for every subcommand:

    0  certified / run ok
    1  not certified at the requested tolerance (or simulations failed
       their convergence threshold)
    2  input error (bad config, bad flags, bracket without a sign change)
    3  numerical failure inside the solver

Human-readable text goes to stdout by default; ``--json`` swaps it for a
single JSON document with the same content. File-writing subcommands also
drop a manifest listing every artifact next to the outputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DivergenceError, NumericalError, QvnnError
from .inequalities import jensen_gap, random_path, random_rc_instance, rc_gap
from .lkf import lkf_trace
from .lmi import DecisionVars, verify_certificate
from .lowering import build_sdp
from .model import NetworkModel, config_hash, load_model
from .qmatrix import random_hermitian_pd
from .sdp import FeasibilityResult, SolverConfig, scale_problem, solve_feasibility
from .simulate import constant_history, convergence_metrics, integrate

ORACLE_GAP_FLOOR = -1e-9


@dataclasses.dataclass
class RunManifest:
    command: str
    config_path: str | None
    seed: int | None
    config_hash: str | None
    tool_version: str
    started_at: str
    finished_at: str
    output_paths: list[str]

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _emit(report: dict, as_json: bool, lines: list[str]) -> None:
    if as_json:
        print(json.dumps(report, indent=2))
    else:
        for line in lines:
            print(line)


def _load(config: str) -> tuple[NetworkModel, dict]:
    return load_model(config)


# ---- certify ---------------------------------------------------------------------


def _certify_model(model: NetworkModel, margin_tol: float, seed: int,
                   ) -> tuple[FeasibilityResult, DecisionVars | None, dict]:
    t0 = time.perf_counter()
    sdp = build_sdp(model)
    t_build = time.perf_counter() - t0
    scaled, record = scale_problem(sdp)
    result = solve_feasibility(
        scaled, SolverConfig(margin_tolerance=margin_tol, seed=seed))
    timings = {"build_seconds": round(t_build, 3),
               "solve_seconds": round(result.wall_time, 3)}
    dv = None
    if result.x is not None:
        dv = DecisionVars.from_vector(record.map_back(result.x), model.n)
    return result, dv, timings


def cmd_certify(args) -> int:
    model, doc = _load(args.config)
    started = _now()
    result, dv, timings = _certify_model(model, args.margin_tol, args.seed)
    if result.status == "numerical_failure":
        _emit({"status": result.status}, args.json,
              ["status: numerical_failure (all solver restarts broke down)"])
        return 3

    recheck = None
    certified = False
    if result.status == "feasible" and dv is not None:
        recheck = verify_certificate(model, dv, margin=0.5 * result.margin)
        certified = recheck.valid

    report = {
        "status": "certified" if certified else "not_certified",
        "solver_status": result.status,
        "margin": result.margin,
        "margin_tolerance": args.margin_tol,
        "num_variables": build_var_count(model.n),
        "iterations": result.iterations,
        "outer_rounds": result.outer_rounds,
        "seed_used": result.seed_used,
        "timings": timings,
        "per_constraint_min_eig": result.per_constraint_min_eig,
        "config_hash": config_hash(doc),
    }
    if recheck is not None:
        report["recheck_worst_margin"] = recheck.worst_margin
        report["recheck_valid"] = recheck.valid

    lines = [
        f"status:  {report['status']}",
        f"solver:  {result.status} (margin {result.margin:.6e}, "
        f"tolerance {args.margin_tol:g})",
        f"size:    {report['num_variables']} scalar variables, "
        f"{len(result.per_constraint_min_eig)} constraints",
        f"effort:  {result.iterations} Newton steps over "
        f"{result.outer_rounds} outer rounds, {timings['solve_seconds']}s",
    ]
    if recheck is not None:
        lines.append(f"recheck: worst constraint margin "
                     f"{recheck.worst_margin:.6e} "
                     f"({'consistent' if recheck.valid else 'INCONSISTENT'})")

    outputs: list[str] = []
    if certified and args.out is not None:
        out_path = Path(args.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        cert_doc = {
            "margin": result.margin,
            "margin_tolerance": args.margin_tol,
            "config_hash": report["config_hash"],
            "n": model.n,
            "variables": dv.to_json(),
        }
        out_path.write_text(json.dumps(cert_doc, indent=2) + "\n")
        outputs.append(str(out_path))
        manifest = RunManifest("certify", args.config, args.seed,
                               report["config_hash"], __version__,
                               started, _now(), outputs)
        manifest_path = out_path.with_suffix(".manifest.json")
        manifest.write(manifest_path)
        lines.append(f"wrote:   {out_path} (+ manifest)")
        report["outputs"] = outputs
    if args.diagnostics is not None:
        diag_path = Path(args.diagnostics)
        diag_path.parent.mkdir(parents=True, exist_ok=True)
        with diag_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "barrier_weight", "t", "min_eig",
                             "newton_steps"])
            for rec in result.trace:
                writer.writerow([rec.iteration, f"{rec.barrier_weight:.6e}",
                                 f"{rec.t:.12e}", f"{rec.min_eig:.12e}",
                                 rec.newton_steps])
        lines.append(f"wrote:   {diag_path}")

    _emit(report, args.json, lines)
    return 0 if certified else 1


def build_var_count(n: int) -> int:
    return DecisionVars.num_scalars(n)


# ---- simulate --------------------------------------------------------------------


def _history_for_seed(model: NetworkModel, seed: int, zero: bool):
    if zero:
        return constant_history(np.zeros((2, model.n), dtype=complex))
    rng = np.random.default_rng(seed)
    parts = rng.uniform(-1.0, 1.0, size=(4, model.n))
    return constant_history(np.stack([parts[0] + 1j * parts[1],
                                      parts[2] + 1j * parts[3]]))


def _write_trajectory_csv(path: Path, traj) -> None:
    n = traj.values.shape[2]
    header = ["time"]
    for j in range(n):
        header += [f"n{j+1}_{c}" for c in ("w", "x", "y", "z")]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, val in zip(traj.times, traj.values):
            row = [f"{t:.6f}"]
            for j in range(n):
                row += [f"{val[0, j].real:.9e}", f"{val[0, j].imag:.9e}",
                        f"{val[1, j].real:.9e}", f"{val[1, j].imag:.9e}"]
            writer.writerow(row)


def _simulate_one(model: NetworkModel, seed: int, args) -> dict:
    history = _history_for_seed(model, seed, args.zero_history)
    entry = {"seed": seed}
    try:
        traj = integrate(model, history, args.horizon, args.step)
    except DivergenceError as exc:
        entry.update(status="diverged", diverged_at=exc.time)
        return entry
    metrics = convergence_metrics(traj, threshold=args.threshold)
    entry.update(
        status="completed",
        final_sup=metrics.final_sup,
        peak=metrics.peak,
        time_to_threshold=metrics.time_to_threshold,
        envelope_bounded=metrics.envelope_bounded,
        converged=bool(metrics.final_sup < args.threshold),
    )
    entry["_trajectory"] = traj
    return entry


def cmd_simulate(args) -> int:
    model, doc = _load(args.config)
    started = _now()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = list(range(args.seed, args.seed + args.seeds))
    workers = int(os.environ.get("QVNN_THREADS", "0")) or min(len(seeds), 4)
    if len(seeds) == 1:
        entries = [_simulate_one(model, seeds[0], args)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda s: _simulate_one(model, s, args),
                                    seeds))

    outputs: list[str] = []
    first_traj = None
    lines = [f"{'seed':>6}  {'status':<10} {'final_sup':>12} "
             f"{'t_thresh':>9} {'envelope':>8}"]
    for entry in entries:
        traj = entry.pop("_trajectory", None)
        if traj is not None:
            if first_traj is None:
                first_traj = (entry["seed"], traj)
            csv_path = out_dir / f"trajectory_seed{entry['seed']}.csv"
            _write_trajectory_csv(csv_path, traj)
            outputs.append(str(csv_path))
            entry["trajectory_csv"] = str(csv_path)
        if entry["status"] == "diverged":
            lines.append(f"{entry['seed']:>6}  diverged at "
                         f"t={entry['diverged_at']:.3f}")
        else:
            tt = entry["time_to_threshold"]
            lines.append(
                f"{entry['seed']:>6}  {entry['status']:<10} "
                f"{entry['final_sup']:>12.3e} "
                f"{(f'{tt:9.3f}' if tt is not None else '     none')} "
                f"{str(entry['envelope_bounded']):>8}")

    lkf_report = None
    if args.lkf is not None:
        lkf_report = _lkf_along_run(model, first_traj, args, out_dir)
        if lkf_report is not None:
            outputs.append(lkf_report["csv"])
            lines.append(f"lkf:    max rise {lkf_report['max_rise']:.3e} "
                         f"(V(0) = {lkf_report['v_start']:.6e}) -> "
                         f"{lkf_report['csv']}")

    summary_path = out_dir / "summary.csv"
    with summary_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["seed", "status", "final_sup", "peak",
                         "time_to_threshold", "envelope_bounded"])
        for entry in entries:
            writer.writerow([entry["seed"], entry["status"],
                             entry.get("final_sup", ""),
                             entry.get("peak", ""),
                             entry.get("time_to_threshold", ""),
                             entry.get("envelope_bounded", "")])
    outputs.append(str(summary_path))

    manifest = RunManifest("simulate", args.config, args.seed,
                           config_hash(doc), __version__, started, _now(),
                           outputs)
    manifest.write(out_dir / "manifest.json")

    ok = all(e["status"] == "completed" and e["converged"] for e in entries)
    report = {"runs": entries, "all_converged": ok,
              "outputs": outputs}
    if lkf_report is not None:
        report["lkf"] = lkf_report
    lines.append(f"summary: {summary_path}")
    _emit(report, args.json, lines)
    return 0 if ok else 1


def _lkf_along_run(model, first_traj, args, out_dir: Path):
    if first_traj is None:
        return None
    cert_doc = json.loads(Path(args.lkf).read_text())
    dv = DecisionVars.from_json(cert_doc["variables"])
    seed, traj = first_traj
    trace = lkf_trace(traj, model, dv, stride=args.lkf_stride)
    csv_path = out_dir / f"lkf_seed{seed}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "v1", "v2", "v3", "v4", "v_total"])
        for i, t in enumerate(trace.times):
            writer.writerow([f"{t:.6f}", f"{trace.v1[i]:.9e}",
                             f"{trace.v2[i]:.9e}", f"{trace.v3[i]:.9e}",
                             f"{trace.v4[i]:.9e}", f"{trace.total[i]:.9e}"])
    return {"seed": seed, "csv": str(csv_path),
            "v_start": float(trace.total[0]),
            "v_end": float(trace.total[-1]),
            "max_rise": trace.max_increase()}


# ---- margin ----------------------------------------------------------------------


def _override_param(doc: dict, param: str, value: float) -> NetworkModel:
    patched = json.loads(json.dumps(doc))
    if param == "delta":
        patched["delta"] = value
    else:
        patched[param] = value
        funcs = patched.get("delay_functions")
        if funcs and param in funcs:
            # keep the declared bound dominant: pin the waveform to a constant
            funcs[param] = {"kind": "constant", "value": value}
    return NetworkModel.from_json(patched)


def _probe(doc: dict, param: str, value: float, margin_tol: float,
           seed: int) -> tuple[str, float]:
    model = _override_param(doc, param, value)
    result, _dv, _timings = _certify_model(model, margin_tol, seed)
    if result.status == "numerical_failure":
        raise NumericalError(f"solver failed at {param}={value:g}")
    return result.status, result.margin


def cmd_margin(args) -> int:
    _model, doc = _load(args.config)
    try:
        lo_text, hi_text = args.bracket.split(",")
        lo, hi = float(lo_text), float(hi_text)
    except ValueError as exc:
        raise QvnnError(f"malformed bracket {args.bracket!r}; "
                        "expected lo,hi") from exc
    if not (hi > lo >= 0.0):
        raise QvnnError("bracket must satisfy 0 <= lo < hi")

    probes = []
    lo_status, lo_margin = _probe(doc, args.param, lo, args.margin_tol,
                                  args.seed)
    probes.append((lo, lo_status, lo_margin))
    hi_status, hi_margin = _probe(doc, args.param, hi, args.margin_tol,
                                  args.seed)
    probes.append((hi, hi_status, hi_margin))
    if lo_status != "feasible" or hi_status == "feasible":
        print(f"bracket error: need (feasible, infeasible) at "
              f"({lo:g}, {hi:g}); got ({lo_status}, {hi_status})")
        return 2

    while hi - lo > args.tol:
        mid = (lo + hi) / 2.0
        status, margin = _probe(doc, args.param, mid, args.margin_tol,
                                args.seed)
        probes.append((mid, status, margin))
        if status == "feasible":
            lo = mid
        else:
            hi = mid

    report = {
        "param": args.param,
        "feasible_up_to": lo,
        "infeasible_from": hi,
        "bracket_width": hi - lo,
        "probes": [{"value": v, "status": s, "margin": m}
                   for v, s, m in probes],
    }
    lines = [f"{'value':>12}  {'status':<26} {'margin':>13}"]
    for v, s, m in probes:
        lines.append(f"{v:>12.6f}  {s:<26} {m:>13.3e}")
    lines.append(f"largest {args.param} certified: {lo:.6f} "
                 f"(next failure at {hi:.6f}, width {hi - lo:.2e})")
    lines.append("note: probes are independent certifications; the sweep "
                 "reports them assuming feasibility is monotone in "
                 f"{args.param}, but each row stands on its own.")
    _emit(report, args.json, lines)
    return 0


# ---- oracles ---------------------------------------------------------------------


def cmd_oracles(args) -> int:
    jensen_gaps = []
    rc_gaps = []
    for idx in range(args.count):
        n = 1 + (idx % 4)
        path = random_path(n, seed=args.seed * 100003 + idx)
        rng = np.random.default_rng(args.seed * 7919 + idx)
        m = random_hermitian_pd(rng, n)
        jensen_gaps.append(jensen_gap(path, m))
        inst = random_rc_instance(1 + (idx % 3), 2, seed=args.seed * 31 + idx)
        rc_gaps.append(rc_gap(inst))

    def stats(gaps):
        if not gaps:
            return {"count": 0}
        return {"count": len(gaps), "min": float(np.min(gaps)),
                "mean": float(np.mean(gaps)), "max": float(np.max(gaps))}

    report = {"jensen": stats(jensen_gaps), "reciprocal_convexity": stats(rc_gaps),
              "gap_floor": ORACLE_GAP_FLOOR}
    ok = all(g >= ORACLE_GAP_FLOOR for g in jensen_gaps + rc_gaps)
    report["all_nonnegative"] = ok
    lines = []
    for label, st in (("jensen", report["jensen"]),
                      ("reciprocal convexity", report["reciprocal_convexity"])):
        if st["count"] == 0:
            lines.append(f"{label}: no samples")
        else:
            lines.append(f"{label}: {st['count']} samples, min gap "
                         f"{st['min']:.3e}, mean {st['mean']:.3e}")
    lines.append("all gaps nonnegative" if ok else "NEGATIVE GAP FOUND")
    _emit(report, args.json, lines)
    return 0 if ok else 1


# ---- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qvnn",
        description="Stability certification toolchain for quaternion-valued "
                    "delayed neural networks")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="assemble, lower and solve the "
                          "stability criterion for a model config")
    cert.add_argument("config")
    cert.add_argument("--margin-tol", type=float, default=1e-6)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--out", default=None,
                      help="write certificate JSON here on success")
    cert.add_argument("--diagnostics", default=None,
                      help="write per-outer-iteration solver CSV here")
    cert.add_argument("--json", action="store_true")
    cert.set_defaults(func=cmd_certify)

    sim = sub.add_parser("simulate", help="integrate the delayed dynamics "
                         "from seeded constant histories")
    sim.add_argument("config")
    sim.add_argument("--seeds", type=int, default=10)
    sim.add_argument("--seed", type=int, default=0, help="first seed")
    sim.add_argument("--horizon", type=float, default=20.0)
    sim.add_argument("--step", type=float, default=1e-3)
    sim.add_argument("--threshold", type=float, default=1e-3)
    sim.add_argument("--zero-history", action="store_true")
    sim.add_argument("--lkf", default=None,
                     help="certificate JSON; evaluate the functional along "
                          "the first completed run")
    sim.add_argument("--lkf-stride", type=int, default=20)
    sim.add_argument("--out-dir", default="qvnn_out")
    sim.add_argument("--json", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    mar = sub.add_parser("margin", help="bisect one delay parameter between "
                         "a feasible and an infeasible value")
    mar.add_argument("config")
    mar.add_argument("--param", choices=("delta", "d1", "d2"), required=True)
    mar.add_argument("--bracket", required=True, metavar="LO,HI")
    mar.add_argument("--tol", type=float, default=1e-3)
    mar.add_argument("--margin-tol", type=float, default=1e-6)
    mar.add_argument("--seed", type=int, default=0)
    mar.add_argument("--json", action="store_true")
    mar.set_defaults(func=cmd_margin)

    orc = sub.add_parser("oracles", help="randomized checks of the two "
                         "integral/matrix inequalities")
    orc.add_argument("--count", type=int, default=100)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--json", action="store_true")
    orc.set_defaults(func=cmd_oracles)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (QvnnError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
