"""Command-line harness: generate instances, run algorithms over seed sweeps,
verify results against the oracle and build lower-bound graphs.

Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

from ._exact import decimal_string, format_fraction, parse_fraction
from .graph import (
    GraphError,
    WeightedGraph,
    build_lower_bound_graph,
    complete_graph,
    cycle_graph,
    generate_bounded_arboricity,
    generate_random_graph,
    generate_star,
    generate_tree,
    path_graph,
    petersen_graph,
    read_graph,
    write_graph,
    write_roles,
)
from .mds_det import (
    DominatingSetResult,
    mds_deterministic,
    mds_unknown_alpha,
    mds_unknown_delta,
    mds_unweighted,
    tree_mds,
)
from .mds_rand import mds_general, mds_randomized
from .oracle import EXACT_CAP, exact_mds, is_dominating, packing_feasible

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = [
    "seed", "trial", "algo", "n", "m", "alpha", "delta", "ds_weight", "opt_weight",
    "ratio", "bound", "rounds", "max_message_bits", "max_c", "within_bound", "error",
]

FAMILIES = ("arboricity", "random", "tree", "star", "path", "cycle", "complete", "petersen", "lower-bound")
DETERMINISTIC_ALGOS = ("det", "unweighted", "unknown-delta", "unknown-alpha", "tree")
RANDOMIZED_ALGOS = ("rand", "general")
ALGOS = DETERMINISTIC_ALGOS + RANDOMIZED_ALGOS


class InvalidConfig(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    n: int = 1
    alpha: int = 1
    weight_max: int = 1
    delta: int = 1
    base: str = "K4"
    p: Fraction = Fraction(1, 2)

    def build(self, seed: int) -> WeightedGraph:
        f = self.family
        if f == "arboricity":
            return generate_bounded_arboricity(self.n, self.alpha, self.weight_max, seed)
        if f == "random":
            return generate_random_graph(self.n, float(self.p), self.weight_max, seed)
        if f == "tree":
            return generate_tree(self.n, seed, self.weight_max)
        if f == "star":
            return generate_star(self.delta)
        if f == "path":
            return path_graph(self.n)
        if f == "cycle":
            return cycle_graph(self.n)
        if f == "complete":
            return complete_graph(self.n)
        if f == "petersen":
            return petersen_graph()
        if f == "lower-bound":
            return build_lower_bound_graph(named_base(self.base)).graph
        raise InvalidConfig(f"unknown family {f!r}")


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    eps: Fraction = Fraction(1, 2)
    t: int = 1
    k: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    algorithm: AlgorithmSpec
    seeds: tuple[int, int] = (0, 1)
    trials: int = 1
    output: str | None = None
    verify: bool = True

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        try:
            gen = dict(data["generator"])
            algo = dict(data["algorithm"])
        except (KeyError, TypeError) as exc:
            raise InvalidConfig(f"config needs 'generator' and 'algorithm' objects: {exc}") from None
        if gen.get("family") not in FAMILIES:
            raise InvalidConfig(f"generator.family must be one of {', '.join(FAMILIES)}")
        if algo.get("name") not in ALGOS:
            raise InvalidConfig(f"algorithm.name must be one of {', '.join(ALGOS)}")
        try:
            gspec = GeneratorSpec(
                family=gen["family"],
                n=int(gen.get("n", 1)),
                alpha=int(gen.get("alpha", 1)),
                weight_max=int(gen.get("weight_max", 1)),
                delta=int(gen.get("delta", 1)),
                base=str(gen.get("base", "K4")),
                p=parse_fraction(gen.get("p", "1/2")),
            )
            aspec = AlgorithmSpec(
                name=algo["name"],
                eps=parse_fraction(algo.get("eps", "1/2")),
                t=int(algo.get("t", 1)),
                k=int(algo.get("k", 1)),
            )
            seeds = data.get("seeds", [0, 1])
            if isinstance(seeds, dict):
                seeds = [seeds["start"], seeds["stop"]]
            lo, hi = (int(s) for s in seeds)
            trials = int(data.get("trials", 1))
        except (ValueError, TypeError, KeyError) as exc:
            raise InvalidConfig(str(exc)) from None
        if trials < 1:
            raise InvalidConfig("trials must be >= 1")
        return cls(gspec, aspec, (lo, hi), trials, data.get("output"), bool(data.get("verify", True)))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}: {exc}") from None
    return ExperimentConfig.from_json(data)


def named_base(name: str) -> WeightedGraph:
    table: dict[str, Callable[[], WeightedGraph]] = {
        "K2": lambda: complete_graph(2),
        "K3": lambda: complete_graph(3),
        "K4": lambda: complete_graph(4),
        "C5": lambda: cycle_graph(5),
        "petersen": petersen_graph,
    }
    if name in table:
        return table[name]()
    path = Path(name)
    if path.exists():
        with path.open() as fp:
            return read_graph(fp)
    raise InvalidConfig(f"unknown base graph {name!r}")


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def trial_seed(seed: int, trial: int) -> int:
    return (seed << 20) | trial


def run_algorithm(g: WeightedGraph, spec: AlgorithmSpec, seed: int = 0) -> DominatingSetResult:
    name = spec.name
    if name == "det":
        return mds_deterministic(g, spec.eps)
    if name == "unweighted":
        return mds_unweighted(g, spec.eps)
    if name == "unknown-delta":
        return mds_unknown_delta(g, spec.eps)
    if name == "unknown-alpha":
        return mds_unknown_alpha(g, spec.eps)
    if name == "tree":
        return tree_mds(g)
    if name == "rand":
        return mds_randomized(g, spec.t, seed)
    if name == "general":
        return mds_general(g, spec.k, seed)
    raise InvalidConfig(f"unknown algorithm {name!r}")


def _instance_rows(cfg: ExperimentConfig, seed: int) -> list[dict[str, Any]]:
    base = {"seed": seed, "algo": cfg.algorithm.name}
    try:
        g = cfg.generator.build(seed)
    except (GraphError, InvalidConfig, ValueError) as exc:
        return [dict(base, trial=t, error=f"{type(exc).__name__}: {exc}") for t in range(cfg.trials)]
    base.update(
        n=g.n, m=g.m, alpha="" if g.declared_alpha is None else g.declared_alpha, delta=g.max_degree
    )
    opt = exact_mds(g).opt_weight if cfg.verify and g.n <= EXACT_CAP else None
    rows = []
    for trial in range(cfg.trials):
        row = dict(base, trial=trial, opt_weight="" if opt is None else opt)
        try:
            res = run_algorithm(g, cfg.algorithm, trial_seed(seed, trial))
        except Exception as exc:  # recorded per row; the sweep continues
            row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
            continue
        row.update(
            ds_weight=res.total_weight,
            bound=decimal_string(res.claimed_factor),
            rounds=res.rounds,
            max_message_bits=res.max_message_bits,
            max_c=res.extras.get("max_c", ""),
        )
        if opt:
            row["ratio"] = decimal_string(Fraction(res.total_weight, opt))
            row["within_bound"] = int(res.total_weight <= res.claimed_factor * opt)
        rows.append(row)
    return rows


def thread_count() -> int:
    raw = os.environ.get("ARBODOM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidConfig(f"ARBODOM_THREADS must be an integer, got {raw!r}") from None


def sweep(cfg: ExperimentConfig) -> list[dict[str, Any]]:
    """All rows of a config, in seed order regardless of thread count."""
    seeds = range(*cfg.seeds)
    workers = thread_count()
    if workers == 1:
        chunks = [_instance_rows(cfg, s) for s in seeds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda s: _instance_rows(cfg, s), seeds))
    return [row for chunk in chunks for row in chunk]


def rows_to_csv(rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        text = f"{'PASS' if self.ok else 'FAIL'} {self.name}"
        return f"{text}: {self.detail}" if self.detail else text


def verify_result(g: WeightedGraph, res: DominatingSetResult) -> list[Check]:
    checks: list[Check] = []
    bad = [v for v in res.members if not 0 <= v < g.n]
    checks.append(Check("members-in-range", not bad, f"node {bad[0]}" if bad else ""))
    if bad:
        return checks
    if is_dominating(g, res.members):
        checks.append(Check("dominating", True))
    else:
        covered = set(res.members)
        for v in res.members:
            covered.update(g.adjacency[v])
        first = min(set(range(g.n)) - covered)
        checks.append(Check("dominating", False, f"node {first} is not dominated"))
    weight = sum(g.weights[v] for v in res.members)
    checks.append(
        Check("weight", weight == res.total_weight, f"recorded {res.total_weight}, actual {weight}")
    )
    cert = res.certificate
    if cert is not None:
        if len(cert.tau) != g.n:
            checks.append(Check("certificate-feasible", False, "length does not match the graph"))
            return checks
        ok, node = packing_feasible(g, cert)
        detail = "" if ok else f"X_{node} = {cert.load(g, node)} exceeds w = {g.weights[node]}"
        checks.append(Check("certificate-feasible", ok, detail))
    if g.n <= EXACT_CAP:
        opt = exact_mds(g).opt_weight
        if cert is not None and checks[-1].ok:
            total = cert.total()
            checks.append(Check("duality", total <= opt, f"sum x = {total}, OPT = {opt}"))
        if res.algo in DETERMINISTIC_ALGOS:
            ok = weight <= res.claimed_factor * opt
            checks.append(
                Check("approximation", ok, f"{weight} vs {format_fraction(res.claimed_factor)} * {opt}")
            )
    return checks


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _graph_text(g: WeightedGraph) -> str:
    buf = io.StringIO()
    write_graph(g, buf)
    return buf.getvalue()


def _write_lower_bound(base: WeightedGraph, out: str | None) -> None:
    lb = build_lower_bound_graph(base)
    _write_text(out, _graph_text(lb.graph))
    roles = io.StringIO()
    write_roles(lb, roles)
    if out is None or out == "-":
        sys.stdout.write(roles.getvalue())
    else:
        Path(out + ".roles").write_text(roles.getvalue())
    nodes, edges = lb.expected_counts()
    print(
        f"lower-bound graph: {lb.graph.n} nodes (expected {nodes}), "
        f"{lb.graph.m} edges (expected {edges}), max degree {lb.graph.max_degree}",
        file=sys.stderr,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(
        args.family, args.n, args.alpha, args.weight_max, args.delta, args.base, parse_fraction(args.p)
    )
    if spec.family == "lower-bound":
        _write_lower_bound(named_base(spec.base), args.output)
    else:
        _write_text(args.output, _graph_text(spec.build(args.seed)))
    return EXIT_OK


def _read_graph_file(path: str) -> WeightedGraph:
    with open(path) as fp:
        return read_graph(fp)


def cmd_run(args: argparse.Namespace) -> int:
    if args.config:
        cfg = load_config(args.config)
        out = args.output or cfg.output
        _write_text(out, rows_to_csv(sweep(cfg)))
        return EXIT_OK
    if not args.graph:
        raise InvalidConfig("run needs --graph or --config")
    g = _read_graph_file(args.graph)
    spec = AlgorithmSpec(args.algo, parse_fraction(args.eps), args.t, args.k)
    if args.trials > 1:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["seed", "weight", "rounds", "max_c"])
        for trial in range(args.trials):
            s = trial_seed(args.seed, trial)
            res = run_algorithm(g, spec, s)
            writer.writerow([s, res.total_weight, res.rounds, res.extras.get("max_c", "")])
        _write_text(args.output, buf.getvalue())
        return EXIT_OK
    res = run_algorithm(g, spec, args.seed)
    _write_text(args.output, json.dumps(res.to_json(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    g = _read_graph_file(args.graph)
    try:
        res = DominatingSetResult.from_json(json.loads(Path(args.result).read_text()))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InvalidConfig(f"unreadable result file: {exc}") from None
    checks = verify_result(g, res)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.ok for c in checks) else EXIT_FAIL


def cmd_lb_construct(args: argparse.Namespace) -> int:
    _write_lower_bound(named_base(args.base), args.output)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    start = time.perf_counter()
    rows = sweep(cfg)
    elapsed = time.perf_counter() - start
    ok = [r for r in rows if not r.get("error")]
    rounds = [r["rounds"] for r in ok]
    print(f"algo={cfg.algorithm.name} rows={len(rows)} errors={len(rows) - len(ok)}")
    print(f"wall_seconds={elapsed:.3f} per_row_ms={1000 * elapsed / max(len(rows), 1):.3f}")
    if rounds:
        print(f"rounds_max={max(rounds)} rounds_mean={sum(rounds) / len(rounds):.2f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arbodom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated graph")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--weight-max", type=int, default=1)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--base", default="K4", help="K2, K3, K4, C5, petersen or a graph file")
    p.add_argument("--p", default="1/2", help="edge probability p/q for the random family")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="run one algorithm, or a sweep from a config")
    p.add_argument("--config")
    p.add_argument("--graph")
    p.add_argument("--algo", choices=ALGOS, default="det")
    p.add_argument("--eps", default="1/2", help="rational p/q")
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check a result JSON against a graph")
    p.add_argument("graph")
    p.add_argument("result")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lb-construct", help="build the lower-bound graph of a base graph")
    p.add_argument("--base", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lb_construct)

    p = sub.add_parser("bench", help="time a config sweep")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfig, GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:  # invalid algorithm parameters
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
