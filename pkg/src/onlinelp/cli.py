"""Batch command-line front end: generate, solve, sift, benchmark.

Subcommands
-----------
gen    write a multi-knapsack benchmark instance to an MPS file
solve  approximate a (generated or parsed) LP with one online pass,
       optionally doubling the duplication factor until a residual target
sift   online pre-pass followed by the exact sifting solver
bench  grids of solve runs (built-in presets or a custom grid) to CSV

Every run echoes its fully resolved configuration, including the derived
stepsize, so any emitted CSV row can be replayed from its own fields.
Relative output paths honor the ONLINELP_OUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import itertools
import os
import sys
import time

import numpy as np

from .instances import MkpParams, ResultRecord, generate_mkp, netlib_modify, write_results_csv
from .model import compute_stats, relative_optimality, stopping_residual
from .mps import MpsParseError, parse_mps, write_mps
from .online import RunConfig, default_stepsize, solve_online, unit_box_rescaled
from .sifting import SiftConfig, SiftRoundLimit, sift
from .simplex import SolveStatus, solve_lp

EXIT_OK = 0
EXIT_PARSE = 3
EXIT_SOLVE = 4
EXIT_LIMIT = 5

MAX_K_DEFAULT = 5000

FIG_SIZES = ((5, 100), (8, 1000), (16, 2000), (32, 4000))
FIG2_KS = (1, 2, 4, 8, 16, 32)
CPUTIME_ROWS = ((10, 0.1), (100, 0.1), (1000, 0.1))  # with n = 10^4: nnz ~ 1e4..1e6


def _resolve_out(path: str | None) -> str | None:
    if path is None:
        return None
    base = os.environ.get("ONLINELP_OUT_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _echo(prefix: str, pairs: dict) -> None:
    for k, v in pairs.items():
        print(f"{prefix} {k} = {v}")


def _parse_gen_spec(spec: str) -> MkpParams:
    fields = {}
    for part in spec.split(","):
        if not part:
            continue
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return MkpParams(
            m=int(fields["m"]), n=int(fields["n"]), tightness=float(fields["tau"]),
            density=float(fields.get("sigma", 1.0)), seed=int(fields.get("seed", 0)),
            perturb_a3=fields.get("perturb", "0") in ("1", "true"),
        )
    except KeyError as exc:
        raise ValueError(f"--gen spec needs m=, n=, tau= (missing {exc})") from exc


def _load_instance(args):
    if getattr(args, "mps", None):
        inst = parse_mps(args.mps)
        label = inst.meta.get("name") or os.path.splitext(os.path.basename(args.mps))[0]
    elif getattr(args, "gen", None):
        params = _parse_gen_spec(args.gen)
        inst = generate_mkp(params)
        label = params.label()
    else:
        raise ValueError("provide an instance via --mps PATH or --gen SPEC")
    if getattr(args, "netlib_modify", False):
        inst = netlib_modify(inst)
    return inst, label


def _run_config(args, duplication: int) -> RunConfig:
    stepsize = args.gamma if args.gamma is not None else args.stepsize
    return RunConfig(
        method=args.method,
        stepsize=stepsize,
        duplication=duplication,
        seed=args.run_seed,
        enforce_feasibility=args.enforce_feasibility,
        start=args.start,
        lazy=args.lazy,
    )


def _derived_gamma(instance, config: RunConfig) -> float:
    scaled, _ = unit_box_rescaled(instance)
    stats = compute_stats(scaled)
    return default_stepsize(stats, scaled.num_rows, scaled.num_cols,
                            config.duplication, config.method, config.stepsize)


def _exact_optimum(instance) -> float | None:
    try:
        res = solve_lp(instance)
    except ValueError as exc:
        print(f"warning: exact reference solve skipped: {exc}", file=sys.stderr)
        return None
    if res.status is not SolveStatus.OPTIMAL:
        print(f"warning: exact reference solve ended with {res.status.value}",
              file=sys.stderr)
        return None
    return res.obj


# -- gen ----------------------------------------------------------------------

def _cmd_gen(args) -> int:
    params = MkpParams(m=args.m, n=args.n, tightness=args.tau, density=args.sigma,
                       seed=args.seed, perturb_a3=args.perturb_a3,
                       b_pre_sparsify=args.b_pre_sparsify)
    _echo("resolved", {"params": params})
    inst = generate_mkp(params)
    out = _resolve_out(args.out)
    write_mps(inst, out, name=params.label())
    print(f"wrote {inst.num_rows}x{inst.num_cols} instance "
          f"({inst.nnz} nonzeros) to {out}")
    return EXIT_OK


# -- solve --------------------------------------------------------------------

def _cmd_solve(args) -> int:
    try:
        instance, label = _load_instance(args)
    except (MpsParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    duplication = args.k
    config = _run_config(args, duplication)
    gamma = _derived_gamma(instance, config)
    _echo("resolved", {
        "instance": label, "method": config.method, "K": duplication,
        "gamma": gamma, "seed": config.seed,
        "enforce_feasibility": config.enforce_feasibility,
        "start": config.start, "lazy": config.lazy,
        "until_eps": args.until_eps, "max_k": args.max_k,
    })

    capped = False
    t0 = time.perf_counter()
    try:
        sol = solve_online(instance, config)
        residual = stopping_residual(instance, sol.x_hat,
                                     np.maximum(sol.y_final, 0.0))
        while args.until_eps is not None and residual > args.until_eps:
            if duplication * 2 > args.max_k:
                capped = True
                break
            duplication *= 2
            config = _run_config(args, duplication)
            sol = solve_online(instance, config)
            residual = stopping_residual(instance, sol.x_hat,
                                         np.maximum(sol.y_final, 0.0))
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    wall = time.perf_counter() - t0

    gamma = _derived_gamma(instance, config)
    rel_opt = None
    if args.exact:
        opt = _exact_optimum(instance)
        if opt not in (None, 0.0):
            rel_opt = relative_optimality(instance, sol.x_hat, opt)

    print(f"objective   {sol.objective:.10g}")
    print(f"violation   {sol.violation:.10g}")
    print(f"residual    {residual:.6g}")
    if rel_opt is not None:
        print(f"rel_opt     {rel_opt:.6g}")
    print(f"K           {duplication}")
    print(f"time_s      {wall:.6g}")
    if capped:
        print(f"K cap {args.max_k} reached before residual <= {args.until_eps}",
              file=sys.stderr)

    if args.out:
        record = ResultRecord(
            instance=label, method=config.method, k=duplication, gamma=gamma,
            seed=config.seed, objective=sol.objective, violation=sol.violation,
            rel_opt=rel_opt, wall_time_s=wall,
        )
        write_results_csv([record], _resolve_out(args.out))
    return EXIT_LIMIT if capped else EXIT_OK


# -- sift ---------------------------------------------------------------------

def _cmd_sift(args) -> int:
    try:
        instance, label = _load_instance(args)
    except (MpsParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    pre_config = RunConfig(
        method=args.prepass_method, stepsize="simple", duplication=args.prepass_k,
        seed=args.run_seed, start=args.prepass_start, lazy=args.prepass_lazy,
    )
    sift_config = SiftConfig(
        init_threshold=args.init_threshold,
        stabilization_alpha=args.alpha,
        use_online_anchor=not args.no_anchor,
        pricing_tolerance=args.pricing_tol,
        max_new_columns_per_round=args.max_new_cols,
        max_rounds=args.max_rounds,
    )
    gamma = _derived_gamma(instance, pre_config)
    _echo("resolved", {
        "instance": label, "prepass_method": pre_config.method,
        "prepass_K": pre_config.duplication, "gamma": gamma,
        "seed": pre_config.seed, "alpha": sift_config.stabilization_alpha,
        "anchor": sift_config.use_online_anchor,
        "init_threshold": sift_config.init_threshold,
        "pricing_tol": sift_config.pricing_tolerance,
    })

    t0 = time.perf_counter()
    try:
        online_sol = solve_online(instance, pre_config)
        result = sift(instance, online_sol, sift_config)
        limited = False
    except SiftRoundLimit as exc:
        result = exc.partial
        limited = True
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"error: sift failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    wall = time.perf_counter() - t0

    print(f"objective   {result.objective:.10g}")
    print(f"rounds      {result.rounds}")
    print(f"working     {result.final_working_set.size} of {instance.num_cols}")
    print(f"acc         {'n/a' if result.acc is None else f'{result.acc:.4f}'}")
    print(f"rdc         {result.rdc:.4f}")
    print(f"time_s      {wall:.6g}")
    if limited:
        print("round limit reached without a global certificate", file=sys.stderr)

    if args.trace_out:
        path = _resolve_out(args.trace_out)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "working", "priced", "objective", "wall_time_s"])
            for r in result.trace:
                writer.writerow([r.round, r.working_size, r.priced,
                                 f"{r.objective:.17g}", f"{r.wall_time_s:.17g}"])
    if args.out:
        record = ResultRecord(
            instance=label, method=f"sift+{pre_config.method}",
            k=pre_config.duplication, gamma=gamma, seed=pre_config.seed,
            objective=result.objective, violation=0.0, rel_opt=None,
            acc=result.acc, rdc=result.rdc, rounds=result.rounds, wall_time_s=wall,
        )
        write_results_csv([record], _resolve_out(args.out))
    return EXIT_LIMIT if limited else EXIT_OK


# -- bench --------------------------------------------------------------------

def _bench_cells(args) -> list[dict]:
    cells = []
    if args.preset == "paper-fig1":
        taus = np.logspace(-2, 0, 10)
        grid = itertools.product(FIG_SIZES, taus, (1, 8),
                                 ("explicit", "implicit"), range(args.reps))
        for (m, n), tau, k, method, rep in grid:
            cells.append(dict(m=m, n=n, tau=float(tau), sigma=1.0, k=k,
                              method=method, rep=rep, enforce=True, exact=True,
                              lazy=False))
    elif args.preset == "paper-fig2":
        grid = itertools.product(FIG_SIZES, FIG2_KS, ("explicit", "implicit"),
                                 range(args.reps))
        for (m, n), k, method, rep in grid:
            cells.append(dict(m=m, n=n, tau=args.tau, sigma=1.0, k=k,
                              method=method, rep=rep, enforce=True, exact=True,
                              lazy=False))
    elif args.preset == "cputime":
        for (m, sigma), rep in itertools.product(CPUTIME_ROWS, range(args.reps)):
            cells.append(dict(m=m, n=10_000, tau=0.25, sigma=sigma, k=1,
                              method="explicit", rep=rep, enforce=False,
                              exact=False, lazy=True))
    else:
        sizes = [tuple(int(t) for t in s.split("x")) for s in args.sizes.split(",")]
        taus = [float(t) for t in args.taus.split(",")]
        ks = [int(t) for t in args.ks.split(",")]
        methods = args.methods.split(",")
        grid = itertools.product(sizes, taus, ks, methods, range(args.reps))
        for (m, n), tau, k, method, rep in grid:
            cells.append(dict(m=m, n=n, tau=tau, sigma=args.sigma, k=k,
                              method=method, rep=rep, enforce=args.enforce_feasibility,
                              exact=args.exact, lazy=args.lazy))
    for cell in cells:
        cell["seed"] = args.seed + cell["rep"]
    return cells


def _bench_cell(cell: dict) -> ResultRecord:
    params = MkpParams(m=cell["m"], n=cell["n"], tightness=cell["tau"],
                       density=cell["sigma"], seed=cell["seed"])
    instance = generate_mkp(params)
    config = RunConfig(method=cell["method"], stepsize="simple",
                       duplication=cell["k"], seed=cell["seed"],
                       enforce_feasibility=cell["enforce"], lazy=cell["lazy"])
    gamma = _derived_gamma(instance, config)
    t0 = time.perf_counter()
    sol = solve_online(instance, config)
    wall = time.perf_counter() - t0
    rel_opt = None
    if cell["exact"]:
        res = solve_lp(instance)
        if res.status is SolveStatus.OPTIMAL and res.obj != 0.0:
            rel_opt = relative_optimality(instance, sol.x_hat, res.obj)
    return ResultRecord(
        instance=params.label(), method=cell["method"], k=cell["k"], gamma=gamma,
        seed=cell["seed"], objective=sol.objective, violation=sol.violation,
        rel_opt=rel_opt, wall_time_s=wall,
    )


def _cmd_bench(args) -> int:
    cells = _bench_cells(args)
    _echo("resolved", {
        "preset": args.preset or "custom", "cells": len(cells),
        "reps": args.reps, "seed": args.seed, "workers": args.workers,
    })
    records: list[ResultRecord | None] = [None] * len(cells)
    failures = 0
    if args.workers > 1 and len(cells) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [pool.submit(_bench_cell, cell) for cell in cells]
            for i, fut in enumerate(futures):
                try:
                    records[i] = fut.result()
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    failures += 1
                    print(f"cell {i} failed: {exc}", file=sys.stderr)
    else:
        for i, cell in enumerate(cells):
            try:
                records[i] = _bench_cell(cell)
            except Exception as exc:  # noqa: BLE001 - cell isolation
                failures += 1
                print(f"cell {i} failed: {exc}", file=sys.stderr)

    kept = [r for r in records if r is not None]
    out = _resolve_out(args.out)
    write_results_csv(kept, out)
    print(f"wrote {len(kept)} rows to {out}"
          + (f" ({failures} cells failed)" if failures else ""))
    return EXIT_SOLVE if failures else EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_instance_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mps", help="read the instance from an MPS file")
    p.add_argument("--gen", help="generate inline: m=..,n=..,tau=..[,sigma=..,seed=..]")
    p.add_argument("--netlib-modify", action="store_true",
                   help="clamp rhs/upper bounds to the supported regime after loading")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onlinelp",
        description="Approximate LP solving by online learning, with exact sifting.",
    )
    parser.add_argument("--config", help="key=value file supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a multi-knapsack instance to MPS")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--tau", type=float, required=True)
    g.add_argument("--sigma", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--perturb-a3", action="store_true")
    g.add_argument("--b-pre-sparsify", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("solve", help="one online pass (optionally K-doubling)")
    _add_instance_options(s)
    s.add_argument("--method", choices=("explicit", "implicit"), default="explicit")
    s.add_argument("--k", type=int, default=1, help="duplication factor K")
    s.add_argument("--gamma", type=float, default=None, help="fixed stepsize")
    s.add_argument("--stepsize", choices=("simple", "theorem"), default="simple")
    s.add_argument("--run-seed", type=int, default=0)
    s.add_argument("--enforce-feasibility", action="store_true")
    s.add_argument("--start", choices=("zero", "ones"), default="zero")
    s.add_argument("--lazy", action="store_true")
    s.add_argument("--until-eps", type=float, default=None,
                   help="double K until the stopping residual drops below this")
    s.add_argument("--max-k", type=int, default=MAX_K_DEFAULT)
    s.add_argument("--exact", action="store_true",
                   help="also solve exactly for relative optimality")
    s.add_argument("--out", help="write a result record CSV")
    s.set_defaults(func=_cmd_solve)

    f = sub.add_parser("sift", help="online pre-pass + exact sifting")
    _add_instance_options(f)
    f.add_argument("--alpha", type=float, default=0.4)
    f.add_argument("--no-anchor", action="store_true")
    f.add_argument("--init-threshold", type=float, default=None)
    f.add_argument("--pricing-tol", type=float, default=1e-7)
    f.add_argument("--max-rounds", type=int, default=200)
    f.add_argument("--max-new-cols", type=int, default=None)
    f.add_argument("--prepass-method", choices=("explicit", "implicit"),
                   default="explicit")
    f.add_argument("--prepass-k", type=int, default=2)
    f.add_argument("--prepass-start", choices=("zero", "ones"), default="ones")
    f.add_argument("--prepass-lazy", action="store_true")
    f.add_argument("--run-seed", type=int, default=0)
    f.add_argument("--out", help="write a result record CSV")
    f.add_argument("--trace-out", help="write the per-round trace CSV")
    f.set_defaults(func=_cmd_sift)

    b = sub.add_parser("bench", help="grid of solve runs to CSV")
    b.add_argument("--preset", choices=("paper-fig1", "paper-fig2", "cputime"))
    b.add_argument("--sizes", default="5x100", help="custom grid: MxN list")
    b.add_argument("--taus", default="0.25")
    b.add_argument("--ks", default="1")
    b.add_argument("--methods", default="explicit,implicit")
    b.add_argument("--sigma", type=float, default=1.0)
    b.add_argument("--tau", type=float, default=0.25, help="tau for paper-fig2")
    b.add_argument("--reps", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--enforce-feasibility", action="store_true")
    b.add_argument("--exact", action="store_true")
    b.add_argument("--lazy", action="store_true")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_bench)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        parser.error("--config needs a path")
    defaults = {}
    try:
        with open(argv[i + 1]) as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                defaults[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
        known = {a.dest for a in action._actions}  # noqa: SLF001
        updates = {}
        for key, value in defaults.items():
            if key in known:
                updates[key] = value
        if updates:
            action.set_defaults(**{k: _coerce_default(action, k, v)
                                   for k, v in updates.items()})
    return argv[:i] + argv[i + 2:]


def _coerce_default(subparser, dest: str, value: str):
    for a in subparser._actions:  # noqa: SLF001
        if a.dest == dest:
            if isinstance(a, argparse._StoreTrueAction):  # noqa: SLF001
                return value in ("1", "true", "yes")
            if a.type is not None:
                return a.type(value)
    return value


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _apply_config_file(parser, argv)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
