"""``consensus-kit`` command line.

Exit codes: 0 ok, 1 check failed (verify above tolerance, closed form
disagrees), 2 unreadable or invalid input, 3 input too large to enumerate,
4 design problem not solvable, 5 integration step collapsed at a barrier,
6 problem and solution files do not belong together.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import (
    BadArgs,
    ConsensusKitError,
    DegenerateSign,
    EmptyPositiveSet,
    InfeasibleFrequency,
    NotSolvable,
    StepCollapse,
    TooLarge,
)
from .graph import UndirectedGraph
from .regions import closed_form_regions, count_regions_repulsive
from .shaping import DEFAULT_EPSILON, CouplingSolution, Problem, design, verify_limit_cycle
from .simulator import (
    ORDERING_CHANGE,
    SimConfig,
    Trajectory,
    detect_phase_lock,
    formation_error,
    sample_initial_phases,
    simulate,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_TOO_LARGE = 3
EXIT_NOT_SOLVABLE = 4
EXIT_COLLAPSE = 5
EXIT_INCONSISTENT = 6

THREADS_ENV = "CONSENSUS_KIT_THREADS"


class Inconsistent(ConsensusKitError):
    """Problem and solution files disagree."""


@dataclass
class RunManifest:
    command: str
    input_hash: str
    seed: int = 0
    config: Optional[dict] = None
    tool_version: str = __version__
    extra: dict = field(default_factory=dict)

    def write(self, artifact) -> Path:
        path = Path(str(artifact) + ".manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return path


def _out_path(path) -> Path:
    """``path`` as a Path, with its parent directory created."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise BadArgs(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise BadArgs(f"{path}: {exc.strerror}") from exc


def load_graph(path) -> UndirectedGraph:
    """A bare graph document, or the graph of a problem document."""
    doc = _load_json(path)
    edges = doc.get("edges") if isinstance(doc, dict) else None
    if edges and isinstance(edges[0], dict):
        return Problem.from_json(doc).graph
    return UndirectedGraph.from_json(doc)


def load_pair(problem_path, solution_path) -> tuple[Problem, CouplingSolution]:
    p = Problem.from_json(_load_json(problem_path))
    s = CouplingSolution.from_json(_load_json(solution_path))
    try:
        s.check_against(p)
    except BadArgs as exc:
        raise Inconsistent(f"{solution_path} does not fit {problem_path}: {exc}") from exc
    return p, s


def _fmt(x: float) -> str:
    return f"{x:.3f}" if x else "."


def coefficient_table(s: CouplingSolution, n: int) -> str:
    rows = []
    for label, table in (("alpha", s.alpha), ("beta", s.beta)):
        if not table:
            continue
        rows.append(f"{label} (row i feels column j)")
        rows.append("      " + "".join(f"{j:>8d}" for j in range(1, n + 1)))
        for i in range(1, n + 1):
            rows.append(f"{i:>6d}" + "".join(f"{_fmt(table.get((i, j), 0.0)):>8s}" for j in range(1, n + 1)))
    return "\n".join(rows)


# --- subcommands -------------------------------------------------------------

def cmd_regions(args) -> int:
    g = load_graph(args.graph)
    report = count_regions_repulsive(g, max_edges=args.max_edges)
    doc = report.to_json()
    status = EXIT_OK
    if args.closed_form:
        expected = closed_form_regions(args.closed_form, g.n)
        doc["closed_form"] = {"family": args.closed_form, "r0": expected, "agrees": expected == report.r0}
        if expected != report.r0:
            status = EXIT_CHECK_FAILED
    text = json.dumps(doc, sort_keys=True)
    print(text)
    if args.output:
        _out_path(args.output).write_text(text + "\n")
        RunManifest("regions", file_hash(args.graph), extra={"closed_form": args.closed_form}).write(args.output)
    return status


def cmd_shape(args) -> int:
    p = Problem.from_json(_load_json(args.problem))
    d = design(p, omega_bar=args.omega_bar, epsilon=args.epsilon, compensate=args.compensate,
               least_communication=args.least_communication)
    s = d.solution
    print(f"mode={p.mode.value} omega_bar={s.omega_bar:.6g} epsilon={s.epsilon:.6g} compensated={s.compensated}")
    print(coefficient_table(s, p.n))
    if s.degenerate_agents:
        print(f"degenerate agents (epsilon couplings only): {list(s.degenerate_agents)}")
    if d.least is not None:
        lc = d.least
        print("least communication")
        print("  directed links: " + " ".join(f"{i}->{j}" for i, j in sorted(lc.directed_links)))
        print("  bidirectional links: " + " ".join(f"{i}->{j}" for i, j in sorted(lc.safe_links)))
        print(f"  count={lc.count} (N={p.n}, C={lc.c}, iSCCs per component={list(lc.n_k)})")
    elif d.support is not None:
        print("spanning tree support: " + " ".join(f"{i}-{j}" for i, j in sorted(d.support) if i < j))
    res = verify_limit_cycle(p, s)
    print(f"max residual {np.max(np.abs(res)):.3g}")
    if args.output:
        _out_path(args.output).write_text(json.dumps(s.to_json(), indent=2) + "\n")
        RunManifest("shape", file_hash(args.problem),
                    extra={"omega_bar": args.omega_bar, "epsilon": args.epsilon, "compensate": args.compensate,
                           "least_communication": args.least_communication}).write(args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    p, s = load_pair(args.problem, args.solution)
    res = verify_limit_cycle(p, s)
    print("agent,residual")
    for i, r in enumerate(res, start=1):
        print(f"{i},{float(r)!r}")
    worst = float(np.max(np.abs(res)))
    ok = worst < args.tol
    print(f"max,{worst!r}")
    print(("PASS" if ok else "FAIL") + f" max |residual| {'<' if ok else '>='} {args.tol}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _read_phases(path, n: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise BadArgs(f"{path}: {exc.strerror}") from exc
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        values = text.replace(",", " ").split()
    if not isinstance(values, list):
        values = [values]
    try:
        theta = np.array([float(v) for v in values], dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadArgs(f"{path}: initial phases must be numbers") from exc
    if theta.shape != (n,):
        raise Inconsistent(f"{path} holds {theta.size} phases for a {n}-agent problem")
    return theta


def _run_path(base: Optional[str], k: int, sweep: int) -> Optional[Path]:
    if base is None:
        return None
    base = Path(base)
    if sweep <= 1:
        return base
    return base.with_name(f"{base.stem}_run{k}{base.suffix}")


@dataclass
class RunSummary:
    run: int
    seed: int
    locked: bool
    t_lock: Optional[float]
    omega_est: Optional[float]
    formation_error: float
    ordering_changes: int
    t_final: float

    def row(self) -> str:
        def f(x):
            return "" if x is None else f"{x:.9g}"

        return ",".join([str(self.run), str(self.seed), str(self.locked).lower(), f(self.t_lock),
                         f(self.omega_est), f"{self.formation_error:.3e}", str(self.ordering_changes),
                         f"{self.t_final:.9g}"])


SUMMARY_HEADER = "run,seed,locked,t_lock,omega_est,formation_error,ordering_changes,t_final"


def _write_outputs(traj: Trajectory, csv_path, plot_stem, p, s, manifest: RunManifest, title: str) -> None:
    if csv_path is not None:
        traj.write_csv(_out_path(csv_path))
        traj.write_events(Path(str(csv_path) + ".events.jsonl"))
        manifest.write(csv_path)
    if plot_stem is not None:
        from .plotting import write_report_figures

        _out_path(plot_stem)
        for png in write_report_figures(traj, plot_stem, p, s.omega_bar, title=title):
            manifest.write(png)


def _one_run(k: int, args, p: Problem, s: CouplingSolution, cfg: SimConfig, input_hash: str) -> RunSummary:
    seed = args.seed + k
    if args.init == "random":
        theta0 = sample_initial_phases(p, s, np.random.default_rng(seed))
    else:
        theta0 = _read_phases(args.init_file, p.n)
    traj = simulate(p, s, theta0, cfg)
    lock = detect_phase_lock(traj, s.omega_bar, cfg.lock_tol, cfg.lock_window)
    manifest = RunManifest("simulate", input_hash, seed, cfg.to_json(),
                           extra={"solution_hash": file_hash(args.solution), "init": args.init, "run": k})
    plot = _run_path(args.plot, k, args.sweep)
    _write_outputs(traj, _run_path(args.csv, k, args.sweep), plot, p, s, manifest, f"run {k}, seed {seed}")
    return RunSummary(k, seed, lock.locked, lock.t_lock, lock.omega_est,
                      formation_error(traj.theta[-1], p), len(traj.events_of(ORDERING_CHANGE)), float(traj.t[-1]))


def worker_count(jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    try:
        limit = int(cap) if cap else (os.cpu_count() or 1)
    except ValueError:
        raise BadArgs(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return max(1, min(jobs, limit))


def _sim_config(args) -> SimConfig:
    return SimConfig(step=args.step, t_end=args.t_end, record_stride=args.record_stride,
                     lock_tol=args.lock_tol, stop_on_lock=not args.run_through)


def cmd_simulate(args) -> int:
    p, s = load_pair(args.problem, args.solution)
    if args.init == "file" and not args.init_file:
        raise BadArgs("--init file needs --init-file PATH")
    if args.sweep < 1:
        raise BadArgs("--sweep must be at least 1")
    cfg = _sim_config(args)
    input_hash = file_hash(args.problem)
    runs = range(args.sweep)
    if args.sweep == 1:
        results = [_one_run(0, args, p, s, cfg, input_hash)]
    else:
        with ThreadPoolExecutor(max_workers=worker_count(args.sweep)) as pool:
            results = list(pool.map(lambda k: _one_run(k, args, p, s, cfg, input_hash), runs))
    print(SUMMARY_HEADER)
    for r in results:
        print(r.row())
    return EXIT_OK


def cmd_demo_fig2(args) -> int:
    from .scenarios import fig2_initial_phases, fig2_problem, fig2_solution

    p = fig2_problem()
    s = fig2_solution(bidirectional=args.bidirectional, epsilon=args.epsilon)
    cfg = SimConfig(t_end=args.t_end, record_stride=args.record_stride, stop_on_lock=False)
    try:
        traj = simulate(p, s, fig2_initial_phases(), cfg)
    except StepCollapse as exc:
        traj = exc.trajectory
        print(f"step collapse at t={exc.t_last}")
    variant = "bidirectional" if args.bidirectional else "directed"
    print(f"fig2 {variant}: {len(traj.events_of(ORDERING_CHANGE))} ordering change(s)")
    print("t,kind,detail")
    for e in traj.events:
        print(f"{e.t:.6g},{e.kind},{e.detail}")
    manifest = RunManifest("demo-fig2", hashlib.sha256(json.dumps(p.to_json()).encode()).hexdigest(), 0,
                           cfg.to_json(), extra={"variant": variant, "epsilon": args.epsilon})
    _write_outputs(traj, args.csv, args.plot, p, s, manifest, f"barrier crossing demo, {variant} repulsion")
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="consensus-kit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("regions", help="count regions of the repulsive-barrier torus")
    r.add_argument("graph", help="graph JSON {n, edges} or a problem JSON")
    r.add_argument("--closed-form", choices=["tree", "cycle", "complete"], help="cross-check against a family")
    r.add_argument("--max-edges", type=int, default=22)
    r.add_argument("-o", "--output", help="also write the report JSON here")
    r.set_defaults(func=cmd_regions)

    s = sub.add_parser("shape", help="design coupling coefficients for a target formation")
    s.add_argument("problem")
    s.add_argument("--omega-bar", type=float, help="common frequency (default: problem value or auto)")
    s.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    s.add_argument("--compensate", action="store_true", help="absorb the epsilon terms exactly")
    s.add_argument("--least-communication", action="store_true", help="use a minimal set of links")
    s.add_argument("-o", "--output", help="solution JSON path")
    s.set_defaults(func=cmd_shape)

    v = sub.add_parser("verify", help="limit-cycle residual of a solution")
    v.add_argument("problem")
    v.add_argument("solution")
    v.add_argument("--tol", type=float, default=0.05)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("simulate", help="integrate the coupled dynamics")
    m.add_argument("problem")
    m.add_argument("solution")
    m.add_argument("--t-end", type=float, default=100.0)
    m.add_argument("--step", type=float, default=1e-3)
    m.add_argument("--record-stride", type=int, default=100)
    m.add_argument("--lock-tol", type=float, default=1e-3)
    m.add_argument("--run-through", action="store_true", help="keep integrating after phase lock")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--init", choices=["random", "file"], default="random")
    m.add_argument("--init-file", help="phases as JSON list or whitespace/comma separated")
    m.add_argument("--csv", help="trajectory CSV path (events and manifest written alongside)")
    m.add_argument("--sweep", type=int, default=1, help="number of seeded runs (seeds seed..seed+K-1)")
    m.add_argument("--plot", help="write <PLOT>_phases.png and <PLOT>_formation.png")
    m.set_defaults(func=cmd_simulate)

    f = sub.add_parser("demo-fig2", help="directed repulsion lets agents cross a barrier")
    f.add_argument("--bidirectional", action="store_true", help="add epsilon reverse couplings")
    f.add_argument("--epsilon", type=float, default=0.01)
    f.add_argument("--t-end", type=float, default=20.0)
    f.add_argument("--record-stride", type=int, default=10)
    f.add_argument("--csv")
    f.add_argument("--plot")
    f.set_defaults(func=cmd_demo_fig2)
    return parser


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, Inconsistent):
        return EXIT_INCONSISTENT
    if isinstance(exc, TooLarge):
        return EXIT_TOO_LARGE
    if isinstance(exc, (NotSolvable, InfeasibleFrequency, DegenerateSign, EmptyPositiveSet)):
        return EXIT_NOT_SOLVABLE
    if isinstance(exc, StepCollapse):
        return EXIT_COLLAPSE
    # BadArgs, InvalidFormation, InvalidInit, NotConnected, NonpositiveEpsilon and the rest
    return EXIT_PARSE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StepCollapse as exc:
        print(f"error: {exc} (last valid t={exc.t_last})", file=sys.stderr)
        return EXIT_COLLAPSE
    except ConsensusKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
