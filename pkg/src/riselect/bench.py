"""Benchmark harness: solve batches of generated instances and aggregate
per-parameter-set statistics into CSV and aligned-text reports."""

from __future__ import annotations

import statistics
import sys
import time
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .generator import GenParams, generate_instance
from .model import OPTIMAL
from .regret import SolverConfig, minmax_regret

SEED_SPLIT = 1_000_003  # per-instance seed = row seed * SEED_SPLIT + index


@dataclass(frozen=True)
class BenchRow:
    params: GenParams
    n: int
    k_effective_mean: float
    time_mean: Optional[float]  # None when timing was disabled
    time_std: Optional[float]
    iter_mean: Optional[float]  # over runs that reached optimality
    iter_std: Optional[float]
    opt_count: int
    value_mean: float
    gap_mean: Optional[float]  # over non-optimal runs, absent when all optimal
    failures: int = 0


def run_benchmark(
    rows: Sequence[GenParams],
    instances_per_row: int = 10,
    config: SolverConfig = SolverConfig(),
    verbose: bool = False,
    measure_time: bool = True,
) -> list[BenchRow]:
    """Generate and solve ``instances_per_row`` instances per parameter row.

    Per-instance seeds are split off the row seed deterministically, so the
    report is reproducible run to run. A failing instance is recorded and
    skipped; it never aborts the suite. ``measure_time=False`` leaves the
    wall-clock columns blank, which makes the whole report byte-reproducible.
    """
    out = []
    for params in rows:
        times: list[float] = []
        iters_opt: list[int] = []
        values: list[int] = []
        gaps: list[float] = []
        k_effective: list[int] = []
        opt_count = 0
        failures = 0
        for idx in range(instances_per_row):
            seed = params.rng_seed * SEED_SPLIT + idx
            inst_params = replace(params, rng_seed=seed)
            try:
                instance = generate_instance(inst_params)
                k_effective.append(len(instance.forbidden))
                run_config = replace(config, rng_seed=seed)
                t0 = time.monotonic()
                result = minmax_regret(instance, run_config)
                elapsed = time.monotonic() - t0
            except Exception as exc:  # record, never abort the suite
                failures += 1
                print(f"[bench] {inst_params} failed: {exc}", file=sys.stderr)
                continue
            times.append(elapsed)
            values.append(result.upper_bound)
            if result.status == OPTIMAL:
                opt_count += 1
                iters_opt.append(result.iterations)
            else:
                gaps.append(float(result.gap))
            if verbose:
                print(
                    f"[bench] m={params.m} r={params.r} p={params.p} K={params.k_pairs} "
                    f"{params.mode} #{idx}: {result.status} value={result.upper_bound} "
                    f"iters={result.iterations} time={elapsed:.2f}s"
                )
        out.append(
            BenchRow(
                params=params,
                n=params.m * params.r,
                k_effective_mean=statistics.mean(k_effective) if k_effective else 0.0,
                time_mean=(statistics.mean(times) if times else 0.0) if measure_time else None,
                time_std=(statistics.pstdev(times) if times else 0.0) if measure_time else None,
                iter_mean=statistics.mean(iters_opt) if iters_opt else None,
                iter_std=statistics.pstdev(iters_opt) if iters_opt else None,
                opt_count=opt_count,
                value_mean=statistics.mean(values) if values else 0.0,
                gap_mean=statistics.mean(gaps) if gaps else None,
                failures=failures,
            )
        )
    return out


def _fmt(value, missing="-"):
    return missing if value is None else f"{value:.2f}"


CSV_HEADER = "n,m,r_i,p_i,K,time_mean,time_std,iter_mean,iter_std,opt,value_mean,gap"


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    str(row.n),
                    str(row.params.m),
                    str(row.params.r),
                    str(row.params.p),
                    f"{row.k_effective_mean:.2f}",
                    _fmt(row.time_mean),
                    _fmt(row.time_std),
                    _fmt(row.iter_mean),
                    _fmt(row.iter_std),
                    str(row.opt_count),
                    f"{row.value_mean:.2f}",
                    _fmt(row.gap_mean),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def format_table(rows: Sequence[BenchRow]) -> str:
    header = CSV_HEADER.split(",")
    body = [line.split(",") for line in rows_to_csv(rows).strip().splitlines()[1:]]
    widths = [max(len(header[c]), *(len(r[c]) for r in body)) if body else len(header[c]) for c in range(len(header))]
    fmt_row = lambda cells: "  ".join(cell.rjust(widths[c]) for c, cell in enumerate(cells))
    lines = [fmt_row(header), fmt_row(["-" * w for w in widths])]
    lines.extend(fmt_row(r) for r in body)
    return "\n".join(lines) + "\n"
