"""Command-line entry point for benchmark episodes and sweeps."""

from __future__ import annotations

import argparse
import itertools
import sys
from pathlib import Path
from typing import Optional

from .bench import EpisodeJob, run_matrix, write_results

_SWEEPABLE = {
    "agents": int,
    "steps": int,
    "seed": int,
    "w_phi": int,
    "w_pi": int,
    "m": int,
    "k_lns": int,
    "budget_expansions": int,
    "alpha": float,
    "budget_ms": float,
    "solver": str,
    "scheme": str,
    "refiner": str,
    "hindrance": str,
}


class UsageError(ValueError):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lmapf-bench",
        description="Run lifelong multi-agent pathfinding episodes and write metrics.",
    )
    p.add_argument("--map", required=True, help="MovingAI .map file")
    p.add_argument("--scen", required=True, help="MovingAI .scen file (starts only)")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--solver", choices=["pibt", "lacam", "lllg"], default="lllg")
    p.add_argument("--scheme", choices=["empty", "phi", "pi"], default=None,
                   help="guidance warm-start scheme (default pi; lllg only)")
    p.add_argument("--w-phi", type=int, default=20, dest="w_phi")
    p.add_argument("--w-pi", type=int, default=10, dest="w_pi")
    p.add_argument("--m", type=int, default=2, help="guidance refinement rounds")
    p.add_argument("--alpha", type=float, default=5.0)
    p.add_argument("--refine", choices=["none", "lacam-star", "lns"], default=None,
                   help="anytime plan refiner (default none; not for pibt)")
    p.add_argument("--budget-ms", type=float, default=10000.0,
                   help="per-step wall-clock budget; <= 0 disables")
    p.add_argument("--budget-expansions", type=int, default=None,
                   help="per-step node-expansion cap (reproducible runs)")
    p.add_argument("--k-lns", type=int, default=8, dest="k_lns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=1,
                   help="episodes with seeds seed..seed+instances-1")
    p.add_argument("--sweep", action="append", default=[], metavar="KEY=VALUES",
                   help="sweep a parameter: key=v1,v2 or key=a..b; repeatable")
    p.add_argument("--hindrance", choices=["auto", "on", "off"], default="auto")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--heatmap", default=None,
                   help="write stop-count grid CSV (plus _histogram companion)")
    p.add_argument("--trace", default=None, help="write executed trace file")
    p.add_argument("--jobs", type=int, default=1, help="parallel episodes")
    return p


def _parse_sweep(spec: str) -> tuple[str, list]:
    if "=" not in spec:
        raise UsageError(f"--sweep needs key=values, got {spec!r}")
    key, _, raw = spec.partition("=")
    key = key.strip().replace("-", "_")
    if key not in _SWEEPABLE:
        raise UsageError(f"unknown sweep key {key!r}")
    typ = _SWEEPABLE[key]
    raw = raw.strip()
    if ".." in raw and typ is int:
        lo, _, hi = raw.partition("..")
        return key, list(range(int(lo), int(hi) + 1))
    return key, [typ(v) for v in raw.split(",") if v != ""]


def _build_jobs(args) -> list[EpisodeJob]:
    if args.agents < 1:
        raise UsageError("--agents must be at least 1")
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    if args.instances < 1:
        raise UsageError("--instances must be at least 1")
    if args.solver == "pibt" and args.scheme is not None:
        raise UsageError("--scheme has no effect with --solver pibt")
    if args.solver == "pibt" and args.refine is not None:
        raise UsageError("--refine has no effect with --solver pibt")
    for path_arg in (args.map, args.scen):
        if not Path(path_arg).is_file():
            raise UsageError(f"cannot read {path_arg}")

    base = dict(
        map_path=args.map,
        scen_path=args.scen,
        agents=args.agents,
        steps=args.steps,
        solver=args.solver,
        scheme=args.scheme or "pi",
        w_phi=args.w_phi,
        w_pi=args.w_pi,
        m=args.m,
        alpha=args.alpha,
        refiner=args.refine or "none",
        budget_ms=args.budget_ms if args.budget_ms and args.budget_ms > 0 else None,
        budget_expansions=args.budget_expansions,
        k_lns=args.k_lns,
        hindrance=args.hindrance,
    )

    sweeps = [_parse_sweep(s) for s in args.sweep]
    for key, values in sweeps:
        if not values:
            raise UsageError(f"sweep over {key!r} has no values")
    seeds = [args.seed + i for i in range(args.instances)]
    if not any(k == "seed" for k, _ in sweeps):
        sweeps.append(("seed", seeds))
    elif args.instances != 1:
        raise UsageError("use either --instances or --sweep seed=..., not both")

    keys = [k for k, _ in sweeps]
    jobs = []
    for combo in itertools.product(*(v for _, v in sweeps)):
        params = dict(base)
        params.update(dict(zip(keys, combo)))
        params.setdefault("seed", args.seed)
        jobs.append(params)

    many = len(jobs) > 1
    out = []
    for idx, params in enumerate(jobs):
        trace_path = _suffixed(args.trace, idx, many)
        heatmap_path = _suffixed(args.heatmap, idx, many)
        out.append(EpisodeJob(trace_path=trace_path, heatmap_path=heatmap_path, **params))
    return out


def _suffixed(path: Optional[str], idx: int, many: bool) -> Optional[str]:
    if path is None:
        return None
    if not many:
        return path
    p = Path(path)
    return str(p.with_name(f"{p.stem}_e{idx:03d}{p.suffix}"))


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        jobs = _build_jobs(args)
        records = run_matrix(jobs, num_workers=max(1, args.jobs))
        write_results(records, args.out)
    except (UsageError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RuntimeError as e:
        print(f"episode aborted: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
