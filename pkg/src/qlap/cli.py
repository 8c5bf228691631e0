"""``qlap`` command-line interface.

Every subcommand writes one JSON document (stdout, or ``--out``). Exit codes:
0 success, 1 algorithmic failure, 2 I/O or argument error. A plain-text
table is printed instead of JSON only when stdout is a terminal and no
``--out`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np

from . import corpus
from .errors import ComponentSplitAdvised, GraphFormatError, QlapError, UnsupportedK
from .evolution import EvolutionBackend
from .graph import (
    Graph,
    build_laplacian,
    connected_components,
    normalize_laplacian,
    pad_to_power_of_two,
    read_graph,
)
from .qpe import (
    QpeConfig,
    StatePrep,
    bin_distribution,
    classical_reference,
    eigenvalue_histogram,
    prepare_state,
    quantum_fiedler_partition,
    zero_eigenspace,
)
from .qsim import RngStream
from .resources import estimate_from_file
from .spectral import eig_sym, recursive_bisect

NORMS = {"gershgorin": "gershgorin_pow2", "exact": "exact"}
ORDERS = {"1": "first", "first": "first", "2": "symmetric", "symmetric": "symmetric"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _unit_interval(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < x < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return x


def _positive_int(text: str) -> int:
    try:
        x = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return x


def _state_prep(text: str) -> StatePrep:
    try:
        return StatePrep.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser, engine: bool = True) -> None:
    p.add_argument("graph", help="edge-list file ('u v' per line, optional 'N <count>' header)")
    if engine:
        p.add_argument("--engine", choices=["classical", "quantum"], default="classical")
    p.add_argument("--backend", choices=["exact", "trotter"], default="exact")
    p.add_argument("--trotter-steps", type=_positive_int, default=64)
    p.add_argument("--trotter-order", choices=sorted(ORDERS), default="1")
    p.add_argument("--delta", type=_unit_interval, default=1 / 64)
    p.add_argument("--guard", type=int, default=2)
    p.add_argument("--epsilon", type=_unit_interval, default=1e-3)
    p.add_argument("--shots", type=_positive_int, default=1024)
    p.add_argument("--n-samples", type=_positive_int, default=1000)
    p.add_argument("--state-prep", type=_state_prep, default=None)
    p.add_argument("--readout", choices=["trace", "sampling"], default="trace")
    p.add_argument("--norm", choices=sorted(NORMS), default="gershgorin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit timestamps and wall-clock fields (byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qlap", description="Spectral graph partitioning, classical and by "
                                              "simulated quantum phase estimation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", help="Laplacian spectrum or phase-estimation histogram")
    _common(p)
    p.add_argument("--full", action="store_true", help="include eigenvectors (classical)")

    p = sub.add_parser("partition", help="spectral bisection / k-way partition")
    _common(p)
    p.add_argument("--k", type=_positive_int, default=2)

    p = sub.add_parser("components", help="component count three ways")
    _common(p, engine=False)

    p = sub.add_parser("estimate", help="resource estimate from formulas (no simulation)")
    p.add_argument("graph")
    p.add_argument("--delta", type=_unit_interval, default=1 / 64)
    p.add_argument("--epsilon", type=_unit_interval, default=1e-3)
    p.add_argument("--guard", type=int, default=2)
    p.add_argument("--out", default=None)
    p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("compare", help="quantum pipeline against the classical oracle")
    _common(p, engine=False)

    p = sub.add_parser("corpus", help="list or export the shipped graph corpus")
    p.add_argument("action", choices=["list", "export", "show", "path"])
    p.add_argument("target", nargs="?", help="directory for export, graph name for show/path")
    p.add_argument("--out", default=None)
    p.add_argument("--no-timestamp", action="store_true")
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _config(args, default_prep: str) -> QpeConfig:
    backend = EvolutionBackend(
        kind=args.backend,
        trotter_steps=args.trotter_steps,
        trotter_order=ORDERS[args.trotter_order],
        epsilon=args.epsilon,
    )
    return QpeConfig(
        delta=args.delta,
        guard=args.guard,
        backend=backend,
        shots=args.shots,
        n_samples=args.n_samples,
        seed=args.seed,
        state_prep=args.state_prep or default_prep,
        threads=args.threads,
    )


def _graph_info(path: str, g: Graph) -> dict:
    count, _ = connected_components(g)
    return {
        "path": path,
        "num_vertices": g.num_vertices,
        "num_edges": g.num_edges,
        "max_degree": int(g.degrees().max(initial=0)),
        "components": count,
    }


def _prepared(g: Graph, norm: str):
    pg = pad_to_power_of_two(g)
    return pg, normalize_laplacian(build_laplacian(pg), NORMS[norm])


class _Clock:
    def __init__(self):
        self.times: dict[str, float] = {}

    def run(self, key: str, fn, *a, **kw):
        start = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.times[key] = time.perf_counter() - start


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_spectrum(args) -> dict:
    g = read_graph(args.graph)
    report = {"command": "spectrum", "engine": args.engine, "graph": _graph_info(args.graph, g)}
    if args.engine == "classical":
        res = eig_sym(build_laplacian(g))
        report["spectrum"] = res.to_dict(full=args.full)
        return report
    cfg = _config(args, "random_real")
    pg, lap = _prepared(g, args.norm)
    hist = eigenvalue_histogram(lap, cfg, RngStream(cfg.seed))
    report.update(
        padded_vertices=pg.num_vertices,
        ghost_count=pg.ghost_count,
        normalization={"mode": NORMS[args.norm], "divisor": lap.divisor},
        config=cfg.describe(),
        total_qubits=cfg.total_qubits(lap.dim),
        histogram=hist.to_dict(),
    )
    return report


def cmd_partition(args) -> dict:
    g = read_graph(args.graph)
    report = {"command": "partition", "engine": args.engine, "graph": _graph_info(args.graph, g),
              "k": args.k}
    if args.engine == "classical":
        if args.k > g.num_vertices:
            raise ValueError(f"--k {args.k} exceeds the {g.num_vertices} vertices")
        report["partition"] = recursive_bisect(g, args.k).to_dict()
        return report
    if args.k != 2:
        raise UnsupportedK(f"the quantum engine bisects only (k=2), got k={args.k}")
    cfg = _config(args, "orthogonal_random")
    partition, diag = quantum_fiedler_partition(g, cfg, readout=args.readout,
                                                normalization=NORMS[args.norm])
    report.update(config=cfg.describe(), partition=partition.to_dict(), diagnostics=diag)
    return report


def cmd_components(args) -> dict:
    g = read_graph(args.graph)
    uf, _ = connected_components(g)
    oracle = eig_sym(build_laplacian(g)).num_zero
    cfg = _config(args, "orthogonal_random")
    pg, lap = _prepared(g, args.norm)
    space = zero_eigenspace(lap, cfg, RngStream(cfg.seed))
    quantum = space.dimension - lap.ghost_count
    return {
        "command": "components",
        "graph": _graph_info(args.graph, g),
        "config": cfg.describe(),
        "union_find": uf,
        "oracle_num_zero": oracle,
        "quantum": quantum,
        "quantum_accepted_states": space.dimension,
        "ghost_count": lap.ghost_count,
        "rounds": space.rounds,
        "runs": space.runs,
        "agree_union_find_oracle": uf == oracle,
        "agree_union_find_quantum": uf == quantum,
        "agree_all": uf == oracle == quantum,
    }


def cmd_estimate(args) -> dict:
    est = estimate_from_file(args.graph, args.delta, args.epsilon, args.guard)
    return {"command": "estimate", "graph": args.graph, "estimate": est.to_dict()}


def cmd_compare(args, clock: _Clock) -> dict:
    g = read_graph(args.graph)
    cfg = _config(args, "random_real")
    pg, lap = _prepared(g, args.norm)
    oracle = clock.run("classical_spectrum", eig_sym, build_laplacian(g))
    lam = oracle.eigenvalues
    m = cfg.ancilla_bits
    bin_width = lap.divisor / (1 << m)

    hist = clock.run("quantum_histogram", eigenvalue_histogram, lap, cfg, RngStream(cfg.seed))
    peaks = []
    for k in hist.peak_bins(cfg.noise_sigma):
        est = float(hist.eigenvalue_of_bin(k))
        nearest = float(lam[np.argmin(np.abs(lam - est))])
        peaks.append({"bin": k, "count": int(hist.bin_counts[k]), "eigenvalue": est,
                      "nearest_oracle": nearest, "deviation": abs(est - nearest)})
    max_dev = max((p["deviation"] for p in peaks), default=0.0)
    scaled = lam / bin_width
    report = {
        "command": "compare",
        "graph": _graph_info(args.graph, g),
        "config": cfg.describe(),
        "normalization": {"mode": NORMS[args.norm], "divisor": lap.divisor},
        "oracle_eigenvalues": [float(x) for x in lam],
        "dyadic_spectrum": bool(np.all(np.abs(scaled - np.round(scaled)) < 1e-9)),
        "eigenvalues": {
            "peaks": peaks,
            "max_deviation": max_dev,
            "bound": bin_width,
            "within_bound": max_dev <= bin_width + 1e-12,
        },
    }

    if cfg.backend.kind == "trotter":
        # noise-free comparison on one fixed input state
        n = pg.num_vertices.bit_length() - 1
        psi0 = prepare_state(cfg.state_prep, n, RngStream(cfg.seed, (1,)), lap)
        p_trot = bin_distribution(lap, psi0, cfg)
        exact_cfg = replace(cfg, backend=replace(cfg.backend, kind="exact"))
        p_exact = bin_distribution(lap, psi0, exact_cfg)
        report["trotter"] = {
            "modal_bin_trotter": int(np.argmax(p_trot)),
            "modal_bin_exact": int(np.argmax(p_exact)),
            "modal_bins_match": int(np.argmax(p_trot)) == int(np.argmax(p_exact)),
            "total_variation": float(0.5 * np.abs(p_trot - p_exact).sum()),
        }

    count, _ = connected_components(g)
    if count == 1 and g.num_vertices >= 2:
        cl = clock.run("classical_partition", classical_reference, g)
        qp, diag = clock.run("quantum_partition", quantum_fiedler_partition, g, cfg,
                             readout=args.readout, normalization=NORMS[args.norm])
        same = qp.same_up_to_relabel(cl["partition"])
        cut_delta = qp.cut_edges - cl["partition"].cut_edges
        report["partition"] = {
            "classical": cl["partition"].to_dict(),
            "quantum": qp.to_dict(),
            "fiedler_value": cl["fiedler_value"],
            "fiedler_estimate": diag["fiedler_estimate"],
            "degenerate": cl["degenerate"],
            "assignment_agrees": same,
            "cut_size_delta": cut_delta,
            "agreement": (cut_delta == 0) if cl["degenerate"] else same,
            "compared_on": "cut_size" if cl["degenerate"] else "assignment",
        }
    else:
        report["partition"] = {"skipped": f"graph has {count} components"}
    return report


def cmd_corpus(args) -> dict:
    if args.action == "list":
        return {"command": "corpus", "graphs": [
            {"name": n, "num_vertices": corpus.load(n).num_vertices,
             "num_edges": corpus.load(n).num_edges} for n in corpus.names()]}
    if not args.target:
        raise ValueError(f"corpus {args.action} needs a target")
    if args.action == "export":
        written = corpus.export(args.target)
        return {"command": "corpus", "exported": [str(p) for p in written]}
    if args.target not in corpus.names():
        raise ValueError(f"unknown corpus graph {args.target!r}")
    if args.action == "path":
        return {"command": "corpus", "name": args.target, "path": str(corpus.path(args.target))}
    g = corpus.load(args.target)
    return {"command": "corpus", "name": args.target, "num_vertices": g.num_vertices,
            "edges": [list(e) for e in g.edges]}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _table(report: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines += _table(value, name + ".")
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            cols = list(value[0])
            lines.append(f"{name}:")
            lines.append("  " + "  ".join(f"{c:>12}" for c in cols))
            for row in value:
                lines.append("  " + "  ".join(f"{_cell(row.get(c)):>12}" for c in cols))
        else:
            lines.append(f"{name:<40} {_cell(value)}")
    return lines


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_cell(x) for x in v) + "]"
    return str(v)


def _emit(report: dict, args) -> None:
    text = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif sys.stdout.isatty():
        sys.stdout.write("\n".join(_table(report)) + "\n")
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    clock = _Clock()
    start = time.perf_counter()
    try:
        if args.command == "spectrum":
            report = cmd_spectrum(args)
        elif args.command == "partition":
            report = cmd_partition(args)
        elif args.command == "components":
            report = cmd_components(args)
        elif args.command == "estimate":
            report = cmd_estimate(args)
        elif args.command == "compare":
            report = cmd_compare(args, clock)
        else:
            report = cmd_corpus(args)
    except GraphFormatError as exc:
        print(f"qlap: {args.graph}: {exc}", file=sys.stderr)
        return 2
    except ComponentSplitAdvised as exc:
        print(f"qlap: ComponentSplitAdvised: {exc}", file=sys.stderr)
        return 1
    except QlapError as exc:
        print(f"qlap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"qlap: {exc}", file=sys.stderr)
        return 2

    if not args.no_timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        report["wall_clock_s"] = {"total": time.perf_counter() - start, **clock.times}
    try:
        _emit(report, args)
    except OSError as exc:
        print(f"qlap: cannot write output: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())
