"""Command-line entry point: enumerate, construct, verify, graph, analyze, bench, replay."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analysis import (
    count_report,
    discrepancy_csv,
    discrepancy_table,
    is_normalized,
    probability_report,
)
from .core import format_matrix, is_hadamard, parse_matrix
from .errors import HadamardError, MatrixParseError, SearchFailure
from .graph import EXPORT_FORMATS, build_ortho_graph, edge_count, export_graph, find_cliques
from .search import (
    OSA_DEFAULT_BUDGET,
    RVS_DEFAULT_BUDGET,
    SearchBudget,
    ThresholdSchedule,
    energy,
    exhaustive_search,
    osa_construct,
    rvs_construct,
)
from .vectorspace import enumerate_hsh_vectors, enumerate_psh_vectors, enumerate_sh_vectors

EXIT_OK = 0
EXIT_NOT_HADAMARD = 1
EXIT_PARSE = 2
EXIT_BAD_ORDER = 3

BENCH_SCHEMA = "# schema: shadamard-bench/1"
ANALYZE_SCHEMA = "# schema: shadamard-analyze/1"
MANIFEST_SCHEMA = "shadamard-manifest/1"


class Output:
    """Collects everything a command emits so runs can be fingerprinted."""

    def __init__(self, stream=None):
        self.stream = stream if stream is not None else sys.stdout
        self._hash = hashlib.sha256()

    def write(self, text: str) -> None:
        self.stream.write(text)
        self._hash.update(text.encode())

    def write_file(self, path: str, text: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        self._hash.update(text.encode())

    def digest(self) -> str:
        return "sha256:" + self._hash.hexdigest()


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_range(text: str) -> tuple[int, int, int]:
    m = re.fullmatch(r"(\d+)\.\.(\d+)(?::(\d+))?", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected a..b or a..b:step, got {text!r}")
    a, b, step = int(m[1]), int(m[2]), int(m[3] or 1)
    if a > b or step < 1:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b, step


def _order_to_k(order: int) -> int:
    if order < 4 or order % 4:
        raise ValueError(f"order must be a positive multiple of 4, got {order}")
    return order // 4


def _threads() -> int:
    env = os.environ.get("HF_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ------------------------------------------------------------------ enumerate


def cmd_enumerate(args, out: Output) -> int:
    gen = {"sh": enumerate_sh_vectors, "psh": enumerate_psh_vectors, "hsh": enumerate_hsh_vectors}
    for v in gen[args.family](args.k):
        out.write(f"{v}\n")
    return EXIT_OK


# ------------------------------------------------------------------ construct


def _budget(args, default: SearchBudget) -> SearchBudget:
    return SearchBudget(
        max_iterations=args.max_iter or default.max_iterations,
        max_restarts=args.restarts or default.max_restarts,
        rng_seed=args.seed,
    )


def _osa_trace_csv(trace) -> str:
    rows = ["# schema: shadamard-osa-trace/1", "run,steps,final_energy"]
    rows += [f"{i},{s},{e}" for i, (s, e) in enumerate(zip(trace.run_steps, trace.final_energies))]
    return "\n".join(rows) + "\n"


def cmd_construct(args, out: Output) -> int:
    k = _order_to_k(args.order)
    trace_text = None
    if args.method == "exhaustive":
        result = exhaustive_search(k)
        _note(f"exhaustive order {args.order}: {len(result)} matrices, "
              f"{result.candidates_examined} candidates examined via {result.route}")
        if not len(result):
            raise SearchFailure(f"no SH matrix of order {args.order}")
        picked = result.matrices if args.all else [result[args.index]]
        text = "\n".join(format_matrix(H) for H in picked)
    elif args.method == "rvs":
        H, trace = rvs_construct(k, _budget(args, RVS_DEFAULT_BUDGET))
        _note(f"rvs order {args.order} seed {args.seed}: {trace.total_draws} draws, "
              f"{trace.restarts} restarts")
        text = format_matrix(H)
        trace_text = trace.to_csv()
    else:
        schedule = ThresholdSchedule.parse(args.schedule) if args.schedule else ThresholdSchedule()
        H, trace = osa_construct(k, schedule, _budget(args, OSA_DEFAULT_BUDGET))
        _note(f"osa order {args.order} seed {args.seed}: {trace.total_steps} steps, "
              f"{trace.restarts} restarts, schedule {schedule.text()}")
        text = format_matrix(H)
        trace_text = _osa_trace_csv(trace)
    if args.trace_csv and trace_text is not None:
        out.write_file(args.trace_csv, trace_text)
    if args.out:
        out.write_file(args.out, text)
    else:
        out.write(text)
    return EXIT_OK


# --------------------------------------------------------------------- verify


def verify_text(text: str) -> tuple[int, str]:
    """Check a matrix in text form; returns ``(exit_code, report)``."""
    try:
        A = parse_matrix(text)
    except MatrixParseError as exc:
        return EXIT_PARSE, f"parse error: {exc}\n"
    m = A.shape[0]
    if m % 4:
        return EXIT_BAD_ORDER, (
            f"order: {m}\nerror: order {m} is not a multiple of 4; "
            "a Hadamard matrix of order above 2 needs m = 4k\n"
        )
    had = is_hadamard(A)
    yes = {True: "yes", False: "no"}
    report = (
        f"order: {m}\n"
        f"seminormalized: {yes[bool((A[:, 0] == 1).all())]}\n"
        f"normalized: {yes[is_normalized(A)]}\n"
        f"hadamard: {yes[had]}\n"
        f"energy: {energy(A)}\n"
    )
    return (EXIT_OK if had else EXIT_NOT_HADAMARD), report


def cmd_verify(args, out: Output) -> int:
    with open(args.path, encoding="utf-8") as fh:
        code, report = verify_text(fh.read())
    out.write(report)
    return code


# ---------------------------------------------------------------------- graph


def cmd_graph(args, out: Output) -> int:
    g = build_ortho_graph(args.k)
    if args.export:
        data = export_graph(g, args.export).decode()
        if args.out:
            out.write_file(args.out, data)
        else:
            out.write(data)
    else:
        degs = sorted(set(g.degrees()))
        out.write(
            f"k: {g.k}\nvertices: {g.vertex_count}\nedges: {edge_count(g)}\n"
            f"degrees: {' '.join(map(str, degs))}\nregular: {'yes' if len(degs) == 1 else 'no'}\n"
        )
    if args.cliques:
        n = 0
        for clique in find_cliques(g):
            n += 1
            out.write(" ".join(str(g.vectors[i]) for i in clique) + "\n")
        out.write(f"cliques: {n}\n")
    return EXIT_OK


# -------------------------------------------------------------------- analyze


ANALYZE_COLUMNS = (
    "k,order,n_v,n_o,n_q,n_qu,n_d,n_nh,n_sh,p_perp,log2_p_perp,p_perp_lower,p_perp_upper,"
    "log2_p_hq,log2_p_hq_lower,log2_p_hq_upper,log2_eh,log2_eh_lower,log2_eh_upper"
)


def analyze_csv(ks) -> str:
    rows = [ANALYZE_SCHEMA, ANALYZE_COLUMNS]
    for k in ks:
        c = count_report(k)
        p = probability_report(k)
        opt = lambda x: "unknown" if x is None else str(x)  # noqa: E731
        rows.append(",".join([
            str(k), str(c.order), str(c.n_v), str(c.n_o), str(c.n_q), str(c.n_qu), str(c.n_d),
            opt(c.n_nh), opt(c.n_sh), str(p.p_perp), f"{p.p_perp_log2:.6f}",
            f"{p.p_perp_bounds.lower:.6f}", f"{p.p_perp_bounds.upper:.6f}",
            f"{p.p_h_given_q_log2:.6f}", f"{p.p_h_given_q_bounds_log2.lower:.6f}",
            f"{p.p_h_given_q_bounds_log2.upper:.6f}", f"{p.expected_h_log2:.6f}",
            f"{p.expected_h_log2_bounds.lower:.6f}", f"{p.expected_h_log2_bounds.upper:.6f}",
        ]))
    return "\n".join(rows) + "\n"


def _analyze_text(k: int) -> str:
    c = count_report(k)
    p = probability_report(k)
    lines = [
        f"k = {k} (order {c.order})",
        f"  SH vectors N_V          {c.n_v}",
        f"  orthogonal per vector   {c.n_o}",
        f"  ordered QSH N_Q         {c.n_q}",
        f"  unique QSH N_QU         {c.n_qu}",
        f"  degenerates N_D         {c.n_d}",
        f"  known NH / SH count     {c.n_nh if c.n_nh is not None else 'unknown'} / "
        f"{c.n_sh if c.n_sh is not None else 'unknown'}",
        f"  p_perp                  {p.p_perp} ~ {float(p.p_perp):.6g} "
        f"in [{p.p_perp_bounds.lower:.6g}, {p.p_perp_bounds.upper:.6g}]",
        f"  log2 p(H|Q)             {p.p_h_given_q_log2:.4f} "
        f"in [{p.p_h_given_q_bounds_log2.lower:.4f}, {p.p_h_given_q_bounds_log2.upper:.4f}]",
        f"  log2 E[H]               {p.expected_h_log2:.4f} "
        f"in [{p.expected_h_log2_bounds.lower:.4f}, {p.expected_h_log2_bounds.upper:.4f}]",
    ]
    return "\n".join(lines) + "\n"


def cmd_analyze(args, out: Output) -> int:
    if args.k_range:
        a, b, step = args.k_range
        ks = list(range(a, b + 1, step))
    elif args.k is not None:
        ks = [args.k]
    else:
        ks = list(range(1, 9))
    if min(ks) < 1:
        raise ValueError("k must be positive")
    if args.discrepancy:
        text = discrepancy_csv(discrepancy_table(max(ks)))
    elif args.csv:
        text = analyze_csv(ks)
    else:
        out.write("".join(_analyze_text(k) for k in ks))
        return EXIT_OK
    if args.csv:
        out.write_file(args.csv, text)
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------- bench


@dataclass(frozen=True)
class BenchRun:
    method: str
    order: int
    seed: int
    ok: bool
    restarts: int
    iterations: int
    wall: float
    stages: tuple[int, ...]


def _bench_one(method: str, order: int, seed: int, budget: SearchBudget, schedule) -> BenchRun:
    k = order // 4
    t0 = time.perf_counter()
    try:
        if method == "rvs":
            _, tr = rvs_construct(k, budget)
            stages, iters, restarts = tuple(tr.iterations), tr.total_draws, tr.restarts
        else:
            _, tr = osa_construct(k, schedule, budget)
            stages, iters, restarts = (), tr.total_steps, tr.restarts
        ok = True
    except SearchFailure as exc:
        ok, stages, restarts = False, (), budget.max_restarts
        partial = exc.partial
        iters = getattr(partial, "total_draws", 0) or budget.max_iterations * budget.max_restarts
    return BenchRun(method, order, seed, ok, restarts, iters, time.perf_counter() - t0, stages)


def bench_rows(method, orders, seeds, budget: SearchBudget, schedule=None, threads=1) -> list[BenchRun]:
    jobs = [(o, s) for o in orders for s in seeds]

    def run(job):
        o, s = job
        b = SearchBudget(budget.max_iterations, budget.max_restarts, s)
        return _bench_one(method, o, s, b, schedule)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(run, jobs))


def bench_csv(runs: list[BenchRun], timing: bool = True) -> str:
    """One row per (order, seed), then one mean row per order over successful runs."""
    lines = [BENCH_SCHEMA, "method,order,seed,row,status,restarts,iterations,wall_s,stage_iterations"]
    wall = (lambda w: f"{w:.4f}") if timing else (lambda w: "")
    for r in runs:
        lines.append(
            f"{r.method},{r.order},{r.seed},run,{'ok' if r.ok else 'fail'},{r.restarts},"
            f"{r.iterations},{wall(r.wall)},{';'.join(map(str, r.stages))}"
        )
    for order in sorted({r.order for r in runs}):
        group = [r for r in runs if r.order == order]
        good = [r for r in group if r.ok]
        if good:
            mean_restarts = f"{np.mean([r.restarts for r in good]):.2f}"
            mean_iters = f"{np.mean([r.iterations for r in good]):.1f}"
            stage_means = (
                ";".join(f"{x:.1f}" for x in np.mean([r.stages for r in good], axis=0))
                if good[0].stages else ""
            )
            mean_wall = wall(float(np.mean([r.wall for r in good])))
        else:
            mean_restarts = mean_iters = stage_means = mean_wall = ""
        lines.append(
            f"{group[0].method},{order},*,mean,{len(good)}/{len(group)},{mean_restarts},"
            f"{mean_iters},{mean_wall},{stage_means}"
        )
    return "\n".join(lines) + "\n"


def cmd_bench(args, out: Output) -> int:
    a, b, step = args.orders
    orders = list(range(a, b + 1, step))
    for o in orders:
        _order_to_k(o)
    seeds = list(range(args.seed, args.seed + args.seeds))
    default = RVS_DEFAULT_BUDGET if args.method == "rvs" else OSA_DEFAULT_BUDGET
    budget = _budget(args, default)
    schedule = ThresholdSchedule.parse(args.schedule) if args.schedule else ThresholdSchedule()
    runs = bench_rows(args.method, orders, seeds, budget, schedule, threads=_threads())
    text = bench_csv(runs, timing=not args.no_timing)
    if args.csv:
        out.write_file(args.csv, text)
    else:
        out.write(text)
    return EXIT_OK


# --------------------------------------------------------------------- replay


def cmd_replay(args, out: Output) -> int:
    with open(args.manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    sink = Output(open(os.devnull, "w"))
    try:
        code = _dispatch(manifest["argv"], sink)
    finally:
        sink.stream.close()
    same = sink.digest() == manifest["digest"] and code == manifest.get("exit_code", code)
    out.write(f"recorded: {manifest['digest']}\nreplayed: {sink.digest()}\n"
              f"match: {'yes' if same else 'no'}\n")
    return EXIT_OK if same else 1


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shadamard", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", metavar="PATH", help="write a JSON run manifest")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", parents=[common], help="list balanced vectors")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--family", choices=("sh", "psh", "hsh"), default="sh")
    e.set_defaults(func=cmd_enumerate)

    def search_flags(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iter", type=int, help="draws or steps per run")
        sp.add_argument("--restarts", type=int, help="number of runs")
        sp.add_argument("--schedule", help="annealing schedule, e.g. geometric:0.5:1.0 or metropolis:10:2")

    c = sub.add_parser("construct", parents=[common], help="build an SH matrix")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--method", choices=("exhaustive", "rvs", "osa"), required=True)
    search_flags(c)
    c.add_argument("--trace-csv", metavar="PATH")
    c.add_argument("--out", metavar="PATH")
    c.add_argument("--index", type=int, default=0, help="which exhaustive result to emit")
    c.add_argument("--all", action="store_true", help="emit every exhaustive result")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="check a matrix file")
    v.add_argument("path")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("graph", parents=[common], help="orthogonality graph")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--export", choices=EXPORT_FORMATS)
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--cliques", action="store_true", help="list every (4k-1)-clique")
    g.set_defaults(func=cmd_graph)

    a = sub.add_parser("analyze", parents=[common], help="counts and probability estimates")
    grp = a.add_mutually_exclusive_group()
    grp.add_argument("--k", type=int)
    grp.add_argument("--k-range", type=_parse_range, metavar="A..B")
    a.add_argument("--csv", metavar="PATH")
    a.add_argument("--discrepancy", action="store_true", help="E[H] against known SH counts")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", parents=[common], help="timing sweep over orders and seeds")
    b.add_argument("--method", choices=("rvs", "osa"), required=True)
    b.add_argument("--orders", type=_parse_range, required=True, metavar="A..B:STEP")
    b.add_argument("--seeds", type=int, default=10, help="number of seeds")
    search_flags(b)
    b.add_argument("--csv", metavar="PATH")
    b.add_argument("--no-timing", action="store_true", help="leave wall-time columns empty")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("replay", help="rerun a manifest and compare digests")
    r.add_argument("manifest_path")
    r.set_defaults(func=cmd_replay)
    return p


def _dispatch(argv: list[str], out: Output) -> int:
    args = build_parser().parse_args(argv)
    return _run(args, out)


def _run(args, out: Output) -> int:
    try:
        return args.func(args, out)
    except SearchFailure as exc:
        _note(f"search failed: {exc}")
        return 1
    except (HadamardError, ValueError, OSError) as exc:
        _note(f"error: {exc}")
        return 2


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    out = Output()
    t0 = time.perf_counter()
    code = _run(args, out)
    manifest_path = getattr(args, "manifest", None)
    if manifest_path:
        replay_argv = []
        skip = False
        for tok in argv:
            if skip:
                skip = False
                continue
            if tok == "--manifest":
                skip = True
                continue
            if tok.startswith("--manifest="):
                continue
            replay_argv.append(tok)
        flags = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
        doc = {
            "schema": MANIFEST_SCHEMA,
            "subcommand": args.command,
            "argv": replay_argv,
            "flags": flags,
            "seed": flags.get("seed"),
            "version": __version__,
            "duration_s": round(time.perf_counter() - t0, 6),
            "exit_code": code,
            "digest": out.digest(),
        }
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, default=str)
            fh.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
