"""Command-line interface.

Subcommands: simulate, sweep, holes-dump, verify (oracle|coupling),
stats (regress|ks|pz|tanpoints|components|theorem).

Exit codes: 0 success, 1 check or runtime failure, 2 usage error. All
numeric flags are validated before any work starts. Outputs are
deterministic functions of (config, seed) except wall-times, which live in
dedicated trailing columns/keys.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

from . import checkpoint as ckpt
from . import formats
from .coupling import verify_coupling
from .dynamics import StepEvent, apply_move, direction_from_name, holes_snapshot, new_state, run
from .montecarlo import ExperimentPlan, run_sweep
from .oracle import replay_equivalence
from .stats import (
    hole_components,
    ks_normal,
    ks_pvalue,
    ols_loglog,
    paley_zygmund_check,
    tan_point_exponent,
    theorem_fraction,
)

THREADS_ENV = "EARTHWORM_THREADS"


def _default_parallelism() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def _parse_int_list(raw: str, what: str) -> list:
    try:
        values = [int(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be a comma-separated integer list, got {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError(f"{what} must be nonempty")
    return values


def _parse_float_list(raw: str, what: str) -> list:
    try:
        values = [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be a comma-separated float list, got {raw!r}")
    if not values:
        raise argparse.ArgumentTypeError(f"{what} must be nonempty")
    return values


def _parse_seed_range(raw: str) -> tuple:
    """'a..b' (inclusive) or a single integer."""
    if ".." in raw:
        lo_s, _, hi_s = raw.partition("..")
        try:
            lo, hi = int(lo_s), int(hi_s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed range {raw!r}, expected 'a..b'")
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {raw!r}")
        return lo, hi
    try:
        v = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {raw!r}")
    return v, v


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _positive(parser, name: str, value: Optional[int], minimum: int = 1) -> None:
    if value is not None and value < minimum:
        parser.error(f"{name} must be >= {minimum}, got {value}")


# ---------------------------------------------------------------- simulate


def _run_moves(state, moves) -> None:
    for name in moves:
        apply_move(state, direction_from_name(name, state.dim))


def cmd_simulate(args, parser) -> int:
    _positive(parser, "--dim", args.dim, 2)
    _positive(parser, "--record-every", args.record_every, 1)
    _positive(parser, "--checkpoint-every", args.checkpoint_every, 1)
    if args.moves is None:
        if args.steps is None or args.seed is None:
            parser.error("simulate needs --steps and --seed (or --moves)")
        _positive(parser, "--steps", args.steps, 0)
    elif args.steps is not None:
        parser.error("--moves and --steps are mutually exclusive")
    if args.checkpoint_every is not None and args.checkpoint is None:
        parser.error("--checkpoint-every needs --checkpoint")

    started = time.perf_counter()
    series = None

    if args.moves is not None:
        moves = [tok for tok in args.moves.split(",") if tok.strip()]
        state = new_state(args.dim, seed=args.seed if args.seed is not None else 0,
                          track_visits=args.track_visits)
        _run_moves(state, moves)
        steps_done = state.step_count
        seed_field = args.seed
    else:
        state = None
        if args.checkpoint is not None and os.path.exists(args.checkpoint):
            state = ckpt.load_state(args.checkpoint)
            if state.dim != args.dim:
                raise ckpt.CheckpointError(
                    f"checkpoint dim {state.dim} does not match --dim {args.dim}"
                )
            if state.track_visits != args.track_visits:
                raise ckpt.CheckpointError("checkpoint visit tracking does not match --track-visits")
        if state is None:
            state = new_state(args.dim, seed=args.seed, track_visits=args.track_visits)
        remaining = max(0, args.steps - state.step_count)
        if args.checkpoint is not None:
            stride = args.checkpoint_every or remaining or 1
            while remaining > 0:
                segment = min(stride, remaining)
                summary = run(state, segment, record_every=args.record_every)
                if summary.series:
                    series = (series or []) + summary.series
                ckpt.save_state(state, args.checkpoint)
                remaining -= segment
        else:
            summary = run(state, remaining, record_every=args.record_every)
            series = summary.series
        steps_done = state.step_count
        seed_field = args.seed

    walltime_ms = round((time.perf_counter() - started) * 1e3, 3)
    if series is not None:
        # Segment boundaries may re-record the same multiple; keep first occurrences.
        seen = set()
        series = [p for p in series if not (p[0] in seen or seen.add(p[0]))]
    text = formats.summary_json(
        dim=state.dim,
        steps=steps_done,
        seed=seed_field,
        s_n=state.hole_count,
        created_total=state.created_total,
        tan_total=state.tan_total,
        final_position=state.position,
        walltime_ms=walltime_ms,
        series=series,
    )
    _emit(text, args.out)
    if args.holes_out is not None:
        formats.save_holes_dump(holes_snapshot(state), args.holes_out)
    return 0


# ------------------------------------------------------------------- sweep


def cmd_sweep(args, parser) -> int:
    _positive(parser, "--dim", args.dim, 2)
    _positive(parser, "--replicas", args.replicas, 1)
    _positive(parser, "--parallelism", args.parallelism, 1)
    grid = _parse_int_list(args.n_grid, "--n-grid")
    try:
        plan = ExperimentPlan(
            dim=args.dim,
            n_grid=tuple(grid),
            replicas=args.replicas,
            seed_base=args.seed_base,
            track_visits=args.track_visits,
            record_every=None,
        )
    except ValueError as exc:
        parser.error(str(exc))
    table = run_sweep(plan, parallelism=args.parallelism, checkpoint_path=args.checkpoint)
    formats.save_table_csv(table, args.out)
    return 0


# -------------------------------------------------------------- holes-dump


def cmd_holes_dump(args, parser) -> int:
    _positive(parser, "--dim", args.dim, 2)
    if args.moves is None:
        if args.steps is None or args.seed is None:
            parser.error("holes-dump needs --steps and --seed (or --moves)")
        _positive(parser, "--steps", args.steps, 0)
    elif args.steps is not None:
        parser.error("--moves and --steps are mutually exclusive")

    if args.moves is not None:
        moves = [tok for tok in args.moves.split(",") if tok.strip()]
        state = new_state(args.dim, seed=args.seed if args.seed is not None else 0)
        _run_moves(state, moves)
    else:
        state = new_state(args.dim, seed=args.seed)
        run(state, args.steps)
    sites = holes_snapshot(state)
    if args.out is None or args.out == "-":
        formats.write_holes_dump(sites, sys.stdout)
    else:
        formats.save_holes_dump(sites, args.out)
    return 0


# ------------------------------------------------------------------ verify


def _skip_transfer_fault(state, outcome):
    """Test hook: silently undo the removal side of every transfer."""
    if outcome.event is StepEvent.TRANSFERRED:
        state.holes.add(outcome.transferred_from)
    return outcome


def cmd_verify(args, parser) -> int:
    _positive(parser, "--steps", args.steps, 0)
    _positive(parser, "--dim", args.dim, 2)
    lo, hi = args.seeds
    corrupt = _skip_transfer_fault if args.inject_fault == "skip-transfer" else None

    if args.suite == "oracle":
        report = {
            "suite": "oracle",
            "dim": args.dim,
            "steps": args.steps,
            "seeds": [lo, hi],
            "checked": 0,
            "passed": True,
            "first_failure": None,
        }
        for seed in range(lo, hi + 1):
            res = replay_equivalence(seed, args.steps, args.dim, _corrupt=corrupt)
            report["checked"] += 1
            if not res.ok:
                report["passed"] = False
                report["first_failure"] = res.as_dict()
                break
    else:
        restarts = _parse_int_list(args.restart_at, "--restart-at")
        if any(i < 0 or i > args.steps for i in restarts):
            parser.error(f"--restart-at values must lie in [0, --steps], got {restarts}")
        report = {
            "suite": "coupling",
            "steps": args.steps,
            "seeds": [lo, hi],
            "restart_times": restarts,
            "checked": 0,
            "passed": True,
            "first_failure": None,
        }
        for seed in range(lo, hi + 1):
            for i in restarts:
                res = verify_coupling(seed, args.steps, i)
                report["checked"] += 1
                if not res.ok:
                    report["passed"] = False
                    report["first_failure"] = res.as_dict()
                    break
            if not report["passed"]:
                break

    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.report)
    return 0 if report["passed"] else 1


# ------------------------------------------------------------------- stats


def _load_samples(parser, table_path: str, n: Optional[int]):
    table = formats.load_table_csv(table_path)
    n_values = table.n_values()
    if n is None:
        if len(n_values) != 1:
            parser.error(
                f"table has n values {n_values}; pick one with --n"
            )
        n = n_values[0]
    elif n not in n_values:
        parser.error(f"table has no rows at n={n} (available: {n_values})")
    return table.samples_at(n), n


def cmd_stats(args, parser) -> int:
    if args.stat == "regress":
        table = formats.load_table_csv(args.table)
        fit = ols_loglog(table.mean_pairs())
        payload = {"kind": "loglog_regression", **fit.as_dict(),
                   "pairs": [[n, m] for n, m in table.mean_pairs()]}
    elif args.stat == "ks":
        if args.statistic is not None:
            # Pure-function mode: map a (D, m) pair to its asymptotic p-value.
            if args.m is None:
                parser.error("--statistic needs --m")
            if not 0.0 <= args.statistic <= 1.0:
                parser.error(f"--statistic must be in [0,1], got {args.statistic}")
            if args.m < 1:
                parser.error(f"--m must be >= 1, got {args.m}")
            payload = {
                "kind": "ks_pvalue",
                "statistic": args.statistic,
                "m": args.m,
                "p_value": ks_pvalue(args.statistic, args.m),
            }
        else:
            if args.table is None:
                parser.error("stats ks needs --table or --statistic/--m")
            samples, n = _load_samples(parser, args.table, args.n)
            res = ks_normal(samples)
            payload = {"kind": "ks_normal", "n": n, **res.as_dict()}
    elif args.stat == "pz":
        samples, n = _load_samples(parser, args.table, args.n)
        thetas = _parse_float_list(args.theta, "--theta")
        checks = [paley_zygmund_check(samples, t) for t in thetas]
        payload = {
            "kind": "paley_zygmund",
            "n": n,
            "checks": [c.as_dict() for c in checks],
            "all_hold": all(c.holds for c in checks),
        }
    elif args.stat == "tanpoints":
        table = formats.load_table_csv(args.table)
        fit = tan_point_exponent(table)
        payload = {"kind": "tan_point_exponent", **fit.as_dict(),
                   "pairs": [[n, p] for n, p in table.tan_rate_pairs()]}
    elif args.stat == "theorem":
        samples, n = _load_samples(parser, args.table, args.n)
        if args.delta is None or args.delta <= 0:
            parser.error("--delta must be a positive float")
        frac = theorem_fraction(samples, n, args.delta)
        payload = {
            "kind": "threshold_fraction",
            "n": n,
            "delta": args.delta,
            "threshold": args.delta * n**0.75,
            "fraction": frac,
            "samples": len(samples),
        }
    else:  # components
        holes = formats.load_holes_dump(args.holes)
        visited = formats.load_holes_dump(args.visited) if args.visited else None
        res = hole_components(holes, visited, diagonal=args.diagonal)
        payload = {"kind": "components", **res.as_dict()}

    _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="earthworm",
        description="Hole dynamics of a self-interacting lattice walk: simulate, sweep, verify, analyze.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory, write a JSON summary")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--track-visits", action="store_true")
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--out", default=None, help="summary JSON path (default stdout)")
    p.add_argument("--holes-out", default=None, help="also dump the final hole set")
    p.add_argument("--checkpoint", default=None, help="state checkpoint path (resumes if present)")
    p.add_argument("--checkpoint-every", type=int, default=None, help="checkpoint every K steps")
    p.add_argument("--moves", default=None,
                   help="debug: comma-separated explicit moves instead of random steps")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="replica sweep over an n-grid, write a CSV table")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--n-grid", required=True, help="comma-separated step counts, increasing")
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--seed-base", type=int, required=True)
    p.add_argument("--track-visits", action="store_true")
    p.add_argument("--out", required=True, help="sample table CSV path")
    p.add_argument("--parallelism", type=int, default=_default_parallelism(),
                   help=f"worker processes (default ${THREADS_ENV} or 1)")
    p.add_argument("--checkpoint", default=None, help="sweep checkpoint path (resumes if present)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("holes-dump", help="run a trajectory and dump the hole set")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--moves", default=None,
                   help="debug: comma-separated explicit moves instead of random steps")
    p.add_argument("--out", default=None, help="dump path (default stdout)")
    p.set_defaults(func=cmd_holes_dump)

    p = sub.add_parser("verify", help="mechanical verification suites")
    p.add_argument("--suite", choices=["oracle", "coupling"], required=True)
    p.add_argument("--seeds", type=_parse_seed_range, required=True, help="inclusive range 'a..b'")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--dim", type=int, default=2, help="oracle suite only")
    p.add_argument("--restart-at", default="1,10,100", help="coupling suite restart times")
    p.add_argument("--report", default=None, help="JSON report path (default stdout)")
    p.add_argument("--inject-fault", choices=["skip-transfer"], default=None,
                   help="testing aid: corrupt the indexed engine to prove divergences are caught")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", help="estimators over tables and dumps")
    stat_sub = p.add_subparsers(dest="stat", required=True)

    q = stat_sub.add_parser("regress", help="log-log growth fit of mean hole count vs n")
    q.add_argument("--table", required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    q = stat_sub.add_parser("ks", help="KS normality check of S_n samples")
    q.add_argument("--table", default=None)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--statistic", type=float, default=None, help="pure-function mode: a KS D value")
    q.add_argument("--m", type=int, default=None, help="pure-function mode: sample count")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    q = stat_sub.add_parser("pz", help="second-moment tail bound check")
    q.add_argument("--table", required=True)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--theta", default="0.25,0.5,0.75")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    q = stat_sub.add_parser("tanpoints", help="tan-point frequency decay fit")
    q.add_argument("--table", required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    q = stat_sub.add_parser("theorem", help="fraction of samples above delta * n^(3/4)")
    q.add_argument("--table", required=True)
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    q = stat_sub.add_parser("components", help="connected components of a holes dump")
    q.add_argument("--holes", required=True)
    q.add_argument("--visited", default=None)
    q.add_argument("--diagonal", action="store_true", help="Moore neighborhood instead of 2d-neighbor")
    q.add_argument("--out", default=None)
    q.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ckpt.CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
