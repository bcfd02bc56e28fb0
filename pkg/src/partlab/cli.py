"""Command-line interface.

Subcommands: run a config, print the report schema, generate a graph file,
certify one suite against a graph file, and run a single partitioner.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import PreconditionError
from .expansion import sweep_profile
from .graphs import GENERATORS, load_graph, save_graph
from .harness import ConfigError, SUITES, GraphInstance, run, schema_text, _run_task
from .pagerank import pagerank_partition
from .partitioner import current_sweep, descending_order, sweep_cut
from .spectral import lambda2_pair
from .walks import walk_partition


def _parse_params(pairs: list[str]) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise SystemExit(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        try:
            out[key] = int(val)
        except ValueError:
            out[key] = float(val)
    return out


def cmd_run(args) -> int:
    try:
        return run(args.config, output_dir=args.output,
                   workers=args.workers, make_figures=not args.no_figures)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def cmd_schema(_args) -> int:
    print(schema_text())
    return 0


def cmd_gen(args) -> int:
    params = _parse_params(args.params)
    gen = GENERATORS[args.family]
    try:
        graph = gen(**params)
    except (TypeError, ValueError) as exc:
        print(f"generator error: {exc}", file=sys.stderr)
        return 2
    save_graph(graph, args.output)
    print(f"wrote {args.output}: n={graph.n}, m={graph.num_edges}")
    return 0


def cmd_certify(args) -> int:
    graph = load_graph(args.graph, normalize=args.normalize)
    inst = GraphInstance("file", {"path": args.graph}, None, graph)
    params = {"name": args.suite}
    if args.k:
        params["k"] = args.k
    res = _run_task(inst, args.suite, params)
    if graph.labels is not None:
        print(json.dumps({"label_mapping": graph.labels.tolist()}))
    if res.output is not None:
        for rep in res.output.reports:
            doc = rep.to_dict()
            doc["suite"] = args.suite
            print(json.dumps(doc, sort_keys=True))
    if res.status == "error":
        print(f"error: {res.error}", file=sys.stderr)
        return 1
    if res.status == "skipped":
        print("skipped: suite not applicable to this graph", file=sys.stderr)
        return 0
    return 0 if res.status == "pass" else 1


def cmd_partition(args) -> int:
    graph = load_graph(args.graph, normalize=args.normalize)
    n = graph.n
    seed = args.seed_vertex
    result: dict
    if args.algorithm == "spectral":
        pair = lambda2_pair(graph)
        best, prof = sweep_cut(graph, pair.vector)
        result = {"algorithm": "spectral", "lambda2": pair.value,
                  "set": list(best.set.members), "phi": best.phi}
        profile = prof
    elif args.algorithm == "pagerank":
        if args.phi_target is None:
            raise SystemExit("pagerank partitioning needs --phi-target")
        size = args.size_target or max(2, n // 4)
        mode = "push" if args.push else "exact"
        best, vec = pagerank_partition(graph, seed, args.phi_target, size,
                                       mode=mode)
        result = {"algorithm": f"pagerank_{mode}", "alpha": vec.alpha,
                  "set": list(best.set.members), "phi": best.phi,
                  "pushes": vec.pushes, "edge_touches": vec.edge_touches}
        profile = sweep_profile(graph, descending_order(vec.values),
                                max_prefix=min(2 * len(best.set.members), n - 1))
    elif args.algorithm == "walk":
        if args.phi_target is None:
            raise SystemExit("walk partitioning needs --phi-target")
        size = args.size_target or max(2, n // 4)
        mode = "truncated" if args.truncated else "exact"
        best, vec = walk_partition(graph, seed, args.phi_target, size,
                                   epsilon=args.epsilon, mode=mode)
        result = {"algorithm": f"walk_{mode}", "steps": vec.steps,
                  "set": list(best.set.members), "phi": best.phi,
                  "edge_touches": vec.edge_touches}
        profile = sweep_profile(graph, descending_order(vec.values),
                                max_prefix=min(2 * len(best.set.members), n - 1))
    else:
        best = current_sweep(graph, seed)
        result = {"algorithm": "current", "set": list(best.set.members),
                  "phi": best.phi}
        profile = None
    if graph.labels is not None:
        result["set_labels"] = [int(graph.labels[v]) for v in result["set"]]
    if args.plot and profile is not None:
        from .plotting import render_sweep_figure
        render_sweep_figure(list(range(1, profile.max_prefix + 1)),
                            profile.phi.tolist(), args.plot,
                            title=f"{result['algorithm']} sweep")
        result["figure"] = args.plot
    print(json.dumps(result, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partlab",
                                description="graph-partitioning laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="execute an experiment config")
    pr.add_argument("config")
    pr.add_argument("-o", "--output", default=None, help="output directory")
    pr.add_argument("--workers", type=int, default=None)
    pr.add_argument("--no-figures", action="store_true")
    pr.set_defaults(func=cmd_run)

    ps = sub.add_parser("schema", help="print report schema and CSV contracts")
    ps.set_defaults(func=cmd_schema)

    pg = sub.add_parser("gen", help="generate a graph file")
    pg.add_argument("family", choices=sorted(GENERATORS))
    pg.add_argument("params", nargs="*", help="key=value generator arguments")
    pg.add_argument("-o", "--output", required=True)
    pg.set_defaults(func=cmd_gen)

    pc = sub.add_parser("certify", help="run one suite against a graph file")
    pc.add_argument("suite", choices=sorted(SUITES))
    pc.add_argument("-g", "--graph", required=True)
    pc.add_argument("--normalize", action="store_true",
                    help="normalize degrees on load")
    pc.add_argument("--k", type=int, action="append",
                    help="k values for the kway suite")
    pc.set_defaults(func=cmd_certify)

    pp = sub.add_parser("partition", help="run one partitioning algorithm")
    pp.add_argument("algorithm",
                    choices=["spectral", "pagerank", "walk", "current"])
    pp.add_argument("-g", "--graph", required=True)
    pp.add_argument("--normalize", action="store_true")
    pp.add_argument("--seed-vertex", type=int, default=0)
    pp.add_argument("--phi-target", type=float, default=None)
    pp.add_argument("--size-target", type=int, default=None)
    pp.add_argument("--epsilon", type=float, default=0.5)
    pp.add_argument("--push", action="store_true",
                    help="use the push approximation (pagerank)")
    pp.add_argument("--truncated", action="store_true",
                    help="use the truncated walk (walk)")
    pp.add_argument("--plot", default=None, metavar="PNG",
                    help="write the sweep profile figure")
    pp.set_defaults(func=cmd_partition)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"precondition error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
