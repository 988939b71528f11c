"""Command-line interface: indexing, querying, layout linting, routing,
simulation, and policy comparison.

Exit codes: 0 success, 1 findings or a degraded result, 2 usage or parse
errors, 3 I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .codegraph import ParseError, fallback_token_graph, parse_to_graph
from .configfile import AppConfig, ConfigError, load_config
from .embedding import graph_to_vector
from .fusion import ContextItem, ContextSource, assemble_context, score_items
from .layoutlint import LayoutParseError, check_layout_source
from .routing import (
    Action,
    Battery,
    Complexity,
    DeviceClass,
    NetworkState,
    RoutingState,
    build_mdp,
    expected_cost_breakdown,
    load_policy,
    route,
    save_policy,
    value_iteration,
)
from .simulate import PolicyKind, compare_policies, run_simulation, solve_policy, workload_from_config
from .vindex import IndexFileError, RecordMetadata, VectorIndex

EXIT_OK = 0
EXIT_DEGRADED = 1
EXIT_USAGE = 2
EXIT_IO = 3

DEFAULT_EXTENSIONS = (".java", ".mini")


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _load_app_config(path: str | None) -> AppConfig:
    try:
        return load_config(path)
    except FileNotFoundError as err:
        raise SystemExit(_fail(f"config file not found: {err.filename}", EXIT_IO))
    except ConfigError as err:
        raise SystemExit(_fail(f"config error: {err}", EXIT_USAGE))


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def cmd_index(args) -> int:
    config = _load_app_config(args.config)
    max_files = args.max_files if args.max_files is not None else config.max_files
    root = Path(args.directory)
    if not root.is_dir():
        return _fail(f"not a directory: {root}", EXIT_IO)

    extensions = tuple(args.ext) if args.ext else DEFAULT_EXTENSIONS
    paths = sorted(p for p in root.rglob("*") if p.is_file() and p.suffix in extensions)
    selected = paths[:max_files]
    skipped_cap = paths[max_files:]

    index = VectorIndex(band_config_hash=config.bands.fingerprint())
    parse_failures: list[str] = []
    for path in selected:
        rel = path.relative_to(root).as_posix()
        try:
            source = path.read_text(encoding="utf-8", errors="replace")
            graph = parse_to_graph(source, args.parser)
        except ParseError as err:
            parse_failures.append(rel)
            print(f"warning: skipping {rel}: {err}", file=sys.stderr)
            continue
        except OSError as err:
            return _fail(f"cannot read {path}: {err}", EXIT_IO)
        vector = graph_to_vector(graph, config.bands)
        index.insert(
            rel,
            vector,
            RecordMetadata(path=rel, span=f"1-{source.count(chr(10)) + 1}", source_kind="file"),
        )

    if skipped_cap:
        names = ", ".join(p.relative_to(root).as_posix() for p in skipped_cap)
        print(
            f"warning: file cap {max_files} reached; skipped {len(skipped_cap)} files: {names}",
            file=sys.stderr,
        )

    try:
        index.save(args.out)
    except OSError as err:
        return _fail(f"cannot write {args.out}: {err}", EXIT_IO)

    print(
        _dump_json(
            {
                "indexed": len(index),
                "skipped_over_cap": len(skipped_cap),
                "parse_failures": len(parse_failures),
                "out": str(args.out),
            }
        ),
        end="",
    )
    return EXIT_DEGRADED if skipped_cap or parse_failures else EXIT_OK


def _query_text_for(root_hint: Path, metadata: RecordMetadata, limit: int = 400) -> str:
    path = root_hint / metadata.path
    try:
        head = path.read_text(encoding="utf-8", errors="replace")[:limit]
        return f"{metadata.path}: {head}"
    except OSError:
        return metadata.path


def cmd_query(args) -> int:
    config = _load_app_config(args.config)
    try:
        index = VectorIndex.load(args.index)
    except FileNotFoundError:
        return _fail(f"index file not found: {args.index}", EXIT_IO)
    except IndexFileError as err:
        return _fail(f"cannot load index: {err}", EXIT_IO)
    if index.band_config_hash != config.bands.fingerprint():
        print("warning: index was built with a different embedding config", file=sys.stderr)

    try:
        graph = parse_to_graph(args.text, "mini")
    except ParseError:
        graph = fallback_token_graph(args.text)
    query_vector = graph_to_vector(graph, config.bands)

    result = index.search(query_vector, args.top_k)
    if not result.hits:
        print(_dump_json({"entries": [], "total_tokens": 0}), end="")
        return EXIT_DEGRADED

    root_hint = Path(args.source_root) if args.source_root else Path(".")
    items = []
    for hit in result.hits:
        text = _query_text_for(root_hint, hit.metadata)
        items.append(
            ContextItem(
                source=ContextSource.CODE_CONTEXT,
                vector=index.vector(hit.id).astype(float),
                text=text,
                timestamp_s=0.0,
                token_cost=max(1, math.ceil(len(text) / 4)),
            )
        )
    scored = score_items(query_vector, items, config.fusion_weights, now=0.0)
    fused = assemble_context(scored, args.budget)
    payload = {
        "entries": [
            {"source": e.item.source.value, "weight": e.weight, "text": e.item.text}
            for e in fused.entries
        ],
        "total_tokens": fused.total_tokens,
    }
    print(_dump_json(payload), end="")
    return EXIT_OK


def cmd_describe_layout(args) -> int:
    try:
        xml_text = Path(args.file).read_text(encoding="utf-8")
    except OSError as err:
        return _fail(f"cannot read {args.file}: {err}", EXIT_IO)
    try:
        report = check_layout_source(xml_text)
    except LayoutParseError as err:
        return _fail(f"layout parse error: {err}", EXIT_USAGE)
    payload = {
        "statements": [s.text for s in report.statements],
        "findings": [
            {"kind": f.kind.value, "widgets": list(f.widgets), "message": f.message}
            for f in report.findings
        ],
        "elapsed_ms": report.elapsed_ms,
    }
    print(_dump_json(payload), end="")
    return EXIT_DEGRADED if report.findings else EXIT_OK


def cmd_route(args) -> int:
    config = _load_app_config(args.config)
    fingerprint = config.router_fingerprint()
    mdp = build_mdp(config.device, config.network, config.cost, config.complexity_mix, config.p_drain)
    policy = None
    if args.policy and Path(args.policy).exists():
        try:
            policy, stored_hash = load_policy(args.policy)
        except (OSError, ValueError, KeyError) as err:
            return _fail(f"cannot load policy: {err}", EXIT_IO)
        if stored_hash != fingerprint:
            print("warning: stored policy does not match current config; re-solving", file=sys.stderr)
            policy = None
    if policy is None:
        policy = value_iteration(mdp, config.tolerance)
        if args.policy:
            try:
                save_policy(policy, fingerprint, args.policy)
            except OSError as err:
                return _fail(f"cannot write policy: {err}", EXIT_IO)

    state = RoutingState(
        Complexity(args.complexity),
        DeviceClass(args.device),
        NetworkState(args.network),
        Battery(args.battery),
    )
    action = route(policy, state)
    parts = expected_cost_breakdown(mdp, state, action)
    print(action.value)
    print(
        f"latency_ms={parts.latency_ms} energy_units={parts.energy_units} "
        f"accuracy_loss={parts.accuracy_loss}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _load_app_config(args.config)
    sim = config.sim_config(seed=args.seed, n_tasks=args.n_tasks)
    workload = workload_from_config(sim)
    policy = solve_policy(sim) if sim.policy is PolicyKind.MDP else None
    report, events = run_simulation(workload, sim, policy)
    payload = {
        "policy": sim.policy.value,
        "seed": sim.seed,
        "n_tasks": sim.n_tasks,
        "metrics": report.to_dict(),
    }
    try:
        Path(args.out).write_text(_dump_json(payload), encoding="utf-8")
        if args.events:
            with open(args.events, "w", encoding="utf-8") as fh:
                for event in events:
                    fh.write(json.dumps(event.to_dict(), sort_keys=True) + "\n")
    except OSError as err:
        return _fail(f"cannot write report: {err}", EXIT_IO)
    print(_dump_json(payload), end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _load_app_config(args.config)
    sim_configs = {
        name: config.sim_config(policy=PolicyKind(name), seed=args.seed)
        for name in config.compare_policy_names
    }
    workload = workload_from_config(next(iter(sim_configs.values())))
    report = compare_policies(workload, sim_configs)
    payload = report.to_dict()
    try:
        Path(args.out).write_text(_dump_json(payload), encoding="utf-8")
        if args.csv:
            with open(args.csv, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh).writerows(report.csv_rows())
    except OSError as err:
        return _fail(f"cannot write comparison: {err}", EXIT_IO)
    print(_dump_json(payload), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="devmux", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="embed a source tree into a vector index")
    p.add_argument("directory")
    p.add_argument("--max-files", type=int, default=None, help="file cap (default 500)")
    p.add_argument("--out", default="index.bin")
    p.add_argument("--config", default=None)
    p.add_argument("--parser", default="mini")
    p.add_argument("--ext", action="append", help="file suffix to include (repeatable)")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="search the index and fuse a context bundle")
    p.add_argument("text")
    p.add_argument("--top-k", type=int, default=10)
    p.add_argument("--budget", type=int, default=4096)
    p.add_argument("--index", default="index.bin")
    p.add_argument("--config", default=None)
    p.add_argument("--source-root", default=None, help="base dir for reading hit snippets")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("describe-layout", help="lint a layout file and describe it")
    p.add_argument("file")
    p.set_defaults(func=cmd_describe_layout)

    p = sub.add_parser("route", help="look up the routing action for a state")
    p.add_argument("--complexity", required=True, choices=[c.value for c in Complexity])
    p.add_argument("--device", required=True, choices=[d.value for d in DeviceClass])
    p.add_argument("--network", required=True, choices=[n.value for n in NetworkState])
    p.add_argument("--battery", required=True, choices=[b.value for b in Battery])
    p.add_argument("--config", default=None)
    p.add_argument("--policy", default=None, help="policy JSON to load when fresh, else (re)write")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("simulate", help="run one policy over a synthetic workload")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-tasks", type=int, default=None)
    p.add_argument("--out", default="report.json")
    p.add_argument("--events", default=None, help="also write the event log (JSONL)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run every configured policy on one paired workload")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="comparison.json")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_compare)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
