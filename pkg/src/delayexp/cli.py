"""Batch command-line front end.

Subcommands:
  solve        trajectory CSV (k,x_1,...,x_n); --method both adds a diff CSV
  fundamental  fundamental matrix CSV (k,row,col,value)
  check        invariant suite on a file-given or random batch of systems
  bench        timing sweep CSV (n,m,k,method,seconds), both kernel backends

Exit codes: 0 success / all checks pass; 1 a check or comparison failed;
2 parse or validation errors (with a field diagnostic).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .delayed_exp import block_index, nested_sum_term_count, p_direct, p_table
from .errors import DelayExpError, SystemSpecError
from .fundamental import fundamental_phi
from .randomsys import random_matrix_sequence, random_system
from .checks import default_random_systems, run_check_suite
from .solver import compare, solve_nonhomogeneous_rep, solve_recursion
from .sysio import (
    load_system,
    write_bench_csv,
    write_diff_csv,
    write_fundamental_csv,
    write_trajectory_csv,
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: subcommand plus every knob it honors."""

    command: str
    input: Path | None = None
    output: Path | None = None
    k_max: int = 40
    method: str = "representation"
    tol: float = DEFAULT_TOL
    random: bool = False
    trials: int = 25
    seed: int = 0
    mutate: str | None = None

    def __post_init__(self):
        if self.k_max < 0:
            raise ValueError(f"--k-max must be >= 0, got {self.k_max}")
        if not self.tol > 0:
            raise ValueError(f"--tol must be > 0, got {self.tol}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delayexp",
        description="Solve linear discrete delay systems x(k+1) = A x(k) + B_k x(k-m) + f(k).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", type=Path, required=True, help="system-spec JSON file")
        p.add_argument("--output", type=Path, help="output CSV path")
        p.add_argument("--k-max", type=int, default=40, dest="k_max", help="horizon (default 40)")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="comparison tolerance")

    p_solve = sub.add_parser("solve", help="compute a solution trajectory")
    add_common(p_solve)
    p_solve.add_argument(
        "--method",
        choices=("representation", "recursion", "both"),
        default="representation",
        help="solution path; 'both' also writes a diff CSV and prints pass/fail",
    )

    p_fund = sub.add_parser("fundamental", help="compute the fundamental matrix")
    add_common(p_fund)

    p_check = sub.add_parser("check", help="run the invariant suite")
    p_check.add_argument("--input", type=Path, help="system-spec JSON file")
    p_check.add_argument("--random", action="store_true", help="use generated random systems")
    p_check.add_argument("--trials", type=int, default=25, help="number of random systems")
    p_check.add_argument("--seed", type=int, default=0, help="random seed")
    p_check.add_argument("--k-max", type=int, default=60, dest="k_max")
    p_check.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p_check.add_argument(
        "--mutate",
        choices=("rep-sign",),
        help="negative-testing hook: corrupt one sign in the representation",
    )

    p_bench = sub.add_parser("bench", help="time the evaluators over a sweep")
    p_bench.add_argument("--output", type=Path, required=True)
    p_bench.add_argument("--seed", type=int, default=0)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        output=getattr(args, "output", None),
        k_max=getattr(args, "k_max", 40),
        method=getattr(args, "method", "representation"),
        tol=getattr(args, "tol", DEFAULT_TOL),
        random=getattr(args, "random", False),
        trials=getattr(args, "trials", 25),
        seed=getattr(args, "seed", 0),
        mutate=getattr(args, "mutate", None),
    )


def _default_output(config: RunConfig, suffix: str) -> Path:
    if config.output is not None:
        return config.output
    base = config.input.with_suffix("") if config.input else Path("delayexp-out")
    return Path(f"{base}.{suffix}")


def run_solve(config: RunConfig) -> int:
    system = load_system(config.input)
    out = _default_output(config, "trajectory.csv")
    if config.method == "recursion":
        trajectory = solve_recursion(system, config.k_max)
        write_trajectory_csv(out, trajectory)
        print(f"wrote {out} (method=recursion, k_max={config.k_max})")
        return 0
    if config.method == "representation":
        trajectory = solve_nonhomogeneous_rep(system, config.k_max)
        write_trajectory_csv(out, trajectory)
        print(f"wrote {out} (method=representation, k_max={config.k_max})")
        return 0
    rep = solve_nonhomogeneous_rep(system, config.k_max)
    oracle = solve_recursion(system, config.k_max)
    write_trajectory_csv(out, rep)
    report = compare(rep, oracle, config.tol)
    diff_out = Path(f"{out.with_suffix('')}.diff.csv") if config.output else _default_output(config, "diff.csv")
    write_diff_csv(diff_out, report)
    status = "PASS" if report.passed else "FAIL"
    print(f"wrote {out} and {diff_out}")
    print(
        f"{status}: max_rel_err={report.max_rel_err:.3e} (tol={config.tol:.1e})"
        + ("" if report.passed else f", first failing k={report.first_fail_k}")
    )
    return 0 if report.passed else 1


def run_fundamental(config: RunConfig) -> int:
    system = load_system(config.input)
    phi = fundamental_phi(system, config.k_max)
    out = _default_output(config, "fundamental.csv")
    write_fundamental_csv(out, phi)
    print(f"wrote {out} (k_max={config.k_max})")
    return 0


def run_check(config: RunConfig) -> int:
    if config.random:
        systems = default_random_systems(config.seed, config.trials, config.k_max)
        source = f"{config.trials} random systems (seed={config.seed})"
    else:
        if config.input is None:
            print("check: provide --input FILE or --random", file=sys.stderr)
            return 2
        systems = [load_system(config.input)]
        source = str(config.input)
    results = run_check_suite(
        systems, seed=config.seed, tol=config.tol, k_max=config.k_max, mutate=config.mutate
    )
    print(f"invariant suite on {source}, k_max={config.k_max}, tol={config.tol:.1e}")
    width = max(len(r.name) for r in results)
    all_pass = True
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        all_pass &= r.passed
        print(f"  {r.name:<{width}}  {flag}  max_err={r.max_err:.3e}  ({r.detail})")
    print("all checks passed" if all_pass else "CHECK FAILURES PRESENT")
    return 0 if all_pass else 1


def _bench_sweep(seed: int):
    """Rows (n, m, k, method, seconds): nested-sum evaluators and the oracle.

    The table evaluator is timed once per available kernel backend so the
    compiled extension can be compared against the pure-Python fallback.
    """
    rng = np.random.default_rng(seed)
    rows = []
    backend_impls = _kernels.backends()
    for n in (2, 4):
        for m in (1, 3):
            D = random_matrix_sequence(rng, n, 12)
            system = random_system(rng, n, m)
            for k in (8, 16, 24):
                total_terms = sum(
                    nested_sum_term_count(m, k, d) for d in range(1, block_index(k, m) + 1)
                )
                if total_terms <= 200_000:
                    t0 = time.perf_counter()
                    for d in range(1, block_index(k, m) + 1):
                        p_direct(D, m, k, d, max_terms=10**6)
                    rows.append((n, m, k, "p_direct", time.perf_counter() - t0))
                for backend_name, impl in backend_impls.items():
                    d_stack = np.ascontiguousarray(D.stack(k))
                    l_max = block_index(k, m)
                    t0 = time.perf_counter()
                    for _ in range(5):
                        impl.fill_p_table(d_stack, m, l_max)
                    rows.append((n, m, k, f"p_table_{backend_name}", (time.perf_counter() - t0) / 5))
                t0 = time.perf_counter()
                solve_recursion(system, k)
                rows.append((n, m, k, "recursion", time.perf_counter() - t0))
                t0 = time.perf_counter()
                solve_nonhomogeneous_rep(system, k)
                rows.append((n, m, k, "representation", time.perf_counter() - t0))
    return rows


def run_bench(config: RunConfig) -> int:
    rows = _bench_sweep(config.seed)
    write_bench_csv(config.output, rows)
    print(f"wrote {config.output} ({len(rows)} timings; kernels: {', '.join(_kernels.backends())})")
    return 0


def run(config: RunConfig) -> int:
    handlers = {
        "solve": run_solve,
        "fundamental": run_fundamental,
        "check": run_check,
        "bench": run_bench,
    }
    return handlers[config.command](config)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        return run(config)
    except SystemSpecError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"error: {exc}{field}", file=sys.stderr)
        return 2
    except (DelayExpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
