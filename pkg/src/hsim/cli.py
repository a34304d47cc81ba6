"""Command-line front end.

Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io, meshgen
from .errors import NumericalError
from .hierarchy import DEFAULT_SIGMA, build_hierarchy, default_level_count
from .mesh import MeshError, build_edge_graph, load_mesh, save_obj, save_off
from .operators import assemble, write_matrix_market
from .solver import HsimConfig, hsim_solve, sim_baseline_solve

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERICAL = 0, 1, 2, 3

BENCH_COLUMNS = (
    "mesh", "n", "p", "eps", "solver", "iterations",
    "hierarchy_s", "solve_s", "total_s", "status", "message",
)

log = logging.getLogger("hsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunRecord:
    mesh: str
    n: int
    p: int
    eps: float
    T: int
    sigma: float
    alpha: float
    solver: str
    boundary: str
    seed: int
    iterations: str
    hierarchy_seconds: float
    solve_seconds: float
    total_seconds: float
    outputs: dict = field(default_factory=dict)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _alpha(text):
    v = float(text)
    if not 0 <= v < 0.5:
        raise argparse.ArgumentTypeError("alpha must lie in [0, 0.5)")
    return v


def _add_common(sp, multi=False):
    if multi:
        sp.add_argument("--mesh", action="append", required=True, help="mesh file (OFF/OBJ); repeatable")
    else:
        sp.add_argument("--mesh", required=True, help="mesh file (OFF/OBJ)")
    sp.add_argument("--levels", type=int, default=0, help="hierarchy levels T (0: 2 if p <= 200 else 3)")
    sp.add_argument("--sigma", type=_positive_float, default=DEFAULT_SIGMA)
    sp.add_argument("--alpha", type=_alpha, default=0.1, help="shift ratio")
    sp.add_argument("--boundary", choices=("neumann", "dirichlet"), default="neumann")
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--threads", type=_positive_int, default=1)
    sp.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hsim", description="Laplace-Beltrami eigenpairs by hierarchical subspace iteration")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eigs", help="compute the lowest p eigenpairs")
    _add_common(e)
    e.add_argument("--p", type=_positive_int, required=True)
    e.add_argument("--eps", type=_positive_float, default=1e-2)
    e.add_argument("--solver", choices=("hsim", "sim"), default="hsim")
    e.add_argument("--out", type=Path, default=Path("."))
    e.add_argument("--export-vectors", action="store_true")

    b = sub.add_parser("bench", help="compare HSIM and SIM on meshes x p x eps")
    _add_common(b, multi=True)
    b.add_argument("--p", type=_positive_int, nargs="+", required=True)
    b.add_argument("--eps", type=_positive_float, nargs="+", default=[1e-2])
    b.add_argument("--solvers", nargs="+", choices=("hsim", "sim"), default=["hsim", "sim"])
    b.add_argument("--out", type=Path, default=Path("bench.csv"), help="CSV output file")

    h = sub.add_parser("hierarchy", help="dump samples and prolongation matrices")
    _add_common(h)
    h.add_argument("--p", type=_positive_int, required=True)
    h.add_argument("--out", type=Path, default=Path("."))

    g = sub.add_parser("mesh", help="write a procedural test mesh")
    g.add_argument("shape", choices=("icosphere", "torus", "disk"))
    g.add_argument("--size", type=_positive_int, nargs="+", required=True,
                   help="icosphere: subdivisions; torus: n_major n_minor; disk: rings")
    g.add_argument("--out", type=Path, required=True)
    return parser


def _solve(mesh, ops, solver, args, p, eps, schedules=None):
    if solver == "sim":
        return sim_baseline_solve(
            ops, p, eps, seed=args.seed, threads=args.threads, schedule=schedules[0] if schedules else None
        )
    cfg = HsimConfig(
        p=p, eps=eps, T=args.levels, sigma=args.sigma, alpha=args.alpha, seed=args.seed, threads=args.threads
    )
    return hsim_solve(mesh, ops, cfg, schedules=schedules)


def cmd_eigs(args) -> int:
    mesh = load_mesh(args.mesh)
    ops = assemble(mesh, args.boundary)
    if args.p > ops.n:
        raise UsageError(f"--p {args.p} exceeds the {ops.n} degrees of freedom")
    sol, report = _solve(mesh, ops, args.solver, args, args.p, args.eps)

    args.out.mkdir(parents=True, exist_ok=True)
    outputs = {"eigenvalues": str(args.out / "eigenvalues.csv")}
    io.write_eigen_csv(outputs["eigenvalues"], sol.eigenvalues, sol.residuals)
    if args.export_vectors:
        full = np.zeros((mesh.n_vertices, sol.eigenvectors.shape[1]))
        full[ops.dofs] = sol.eigenvectors
        outputs["eigenvectors"] = str(args.out / "eigenvectors.hsev")
        io.write_vectors(outputs["eigenvectors"], full)
    if args.verbose:
        outputs["trace"] = str(args.out / "trace.csv")
        io.write_trace_csv(outputs["trace"], report.traces)
    rec = RunRecord(
        mesh=str(args.mesh), n=ops.n, p=args.p, eps=args.eps,
        T=len(report.levels) if args.solver == "hsim" else 1,
        sigma=args.sigma, alpha=args.alpha, solver=args.solver, boundary=args.boundary, seed=args.seed,
        iterations=report.iteration_string, hierarchy_seconds=report.hierarchy_seconds,
        solve_seconds=report.solve_seconds, total_seconds=report.total_seconds, outputs=outputs,
    )
    (args.out / "run.json").write_text(json.dumps(asdict(rec), indent=2) + "\n")
    print(f"{args.solver} {report.iteration_string} n={ops.n} p={args.p} total={report.total_seconds:.2f}s")
    return EXIT_OK


def cmd_bench(args) -> int:
    rows = []
    for path in args.mesh:
        try:
            mesh = load_mesh(path)
            ops = assemble(mesh, args.boundary)
        except (MeshError, OSError) as exc:
            rows.append(dict(mesh=path, status="error", message=str(exc)))
            continue
        for p in args.p:
            for eps in args.eps:
                for solver in args.solvers:
                    row = dict(mesh=path, n=ops.n, p=p, eps=eps, solver=solver)
                    try:
                        # pass 1 learns the iteration schedule, pass 2 replays it untested and is timed
                        _, first = _solve(mesh, ops, solver, args, p, eps)
                        _, timed = _solve(mesh, ops, solver, args, p, eps, schedules=first.lock_schedules)
                        row.update(
                            iterations=first.iteration_string,
                            hierarchy_s=f"{timed.hierarchy_seconds:.4f}",
                            solve_s=f"{timed.solve_seconds:.4f}",
                            total_s=f"{timed.total_seconds:.4f}",
                            status="ok",
                            message="",
                        )
                    except (NumericalError, ValueError) as exc:
                        row.update(status="error", message=str(exc))
                    log.info("bench %s", row)
                    rows.append(row)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in BENCH_COLUMNS})
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_hierarchy(args) -> int:
    mesh = load_mesh(args.mesh)
    ops = assemble(mesh, args.boundary)
    T = args.levels or default_level_count(args.p)
    h = build_hierarchy(mesh, ops, args.p, T, args.sigma, seed=args.seed, graph=build_edge_graph(mesh))
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "size", "radius", "mean_nnz_per_row"])
        w.writerow([0, h.dims[0], "", ""])
        for t, u in enumerate(h.prolongations):
            w.writerow([t + 1, h.dims[t + 1], repr(h.radii[t]), repr(u.nnz / u.shape[0])])
    for t, u in enumerate(h.prolongations):
        io.write_index_list(args.out / f"samples_level{t + 1}.txt", h.samples[t])
        write_matrix_market(args.out / f"prolongation_{t}.mtx", u)
    print(f"levels {h.dims} mean nnz/row {[round(x, 2) for x in h.mean_nnz_per_row()]}")
    return EXIT_OK


def cmd_mesh(args) -> int:
    s = args.size
    if args.shape == "icosphere":
        m = meshgen.icosphere(s[0])
    elif args.shape == "torus":
        if len(s) != 2:
            raise UsageError("torus needs --size N_MAJOR N_MINOR")
        m = meshgen.torus(s[0], s[1])
    else:
        m = meshgen.disk(s[0], bulge=0.3)
    (save_obj if args.out.suffix.lower() == ".obj" else save_off)(m, args.out)
    print(f"{args.shape}: {m.n_vertices} vertices -> {args.out}")
    return EXIT_OK


COMMANDS = {"eigs": cmd_eigs, "bench": cmd_bench, "hierarchy": cmd_hierarchy, "mesh": cmd_mesh}


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except (MeshError, OSError) as exc:
        return _fail("io", str(exc), EXIT_IO)
    except NumericalError as exc:
        return _fail("numerical", str(exc), EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
