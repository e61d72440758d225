"""
Command-line interface.

    python run.py <subcommand> [flags]

Every subcommand reads the stream (or a snapshot), clusters it and writes its
artifacts into --out. Exit codes are listed in docs/FORMATS.md.
"""

import argparse
import itertools
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from app.cli.artifacts import (
    ALL_WRITERS,
    ArtifactStage,
    summary,
    write_clusters,
    write_flags,
    write_flows,
    write_histogram,
    write_metrics,
    write_quantiles,
    write_structure,
    write_superclusters,
)
from app.codec import SyntheticChain, parse_binary, parse_text, write_binary, write_text
from app.core.config import RunConfig, load_run_config, settings
from app.core.exceptions import AddressClusterError, ConfigError
from app.core.logging_config import configure_logging
from app.core.models import TxRecord
from app.database.database import create_tables, make_session_factory
from app.services.cluster_engine import ClusterEngine
from app.services.graphs import load_tags
from app.services.persistence import persist_results
from app.services.pipeline import iter_pipelined
from app.services.snapshot import restore, snapshot

logger = logging.getLogger(__name__)

IO_ERROR_EXIT = 3

_SYNTH_FLAGS = {
    "seed": int,
    "num_transactions": int,
    "p_reuse": float,
    "mean_inputs": float,
    "mean_outputs": float,
    "op_return_fraction": float,
    "multisig_fraction": float,
    "coinbase_interval": int,
    "large_merge_count": int,
    "large_merge_size": int,
}


# argument parsing

def _int_list(value: str) -> List[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}") from e


def _interval(value: str) -> Tuple[int, int]:
    try:
        start, end = value.split(":")
        return int(start), int(end)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected START:END, got {value!r}") from e


def _window(value: str):
    if value == "month":
        return value
    try:
        return int(value)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"window must be 'month' or a transaction count, got {value!r}") from e


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    io_group = common.add_argument_group("input")
    io_group.add_argument("--input", dest="inputs", action="append", type=Path, help="stream file (repeatable)")
    io_group.add_argument("--format", choices=["text", "binary", "synthetic"])
    io_group.add_argument("--config", type=Path, help="JSON config file; explicit flags override it")
    mode = io_group.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_const", const=True, help="unknown outpoints are errors")
    mode.add_argument("--lenient", dest="strict", action="store_const", const=False, help="skip unknown outpoints")

    synth = common.add_argument_group("synthetic stream")
    for name, kind in _SYNTH_FLAGS.items():
        synth.add_argument(f"--{name.replace('_', '-')}", dest=f"synth_{name}", type=kind)

    analysis = common.add_argument_group("analysis")
    analysis.add_argument("--window", type=_window, help="'month' or a transaction count")
    analysis.add_argument("--quantile-window", type=int)
    analysis.add_argument("--q", dest="q_list", type=_int_list, help="comma-separated q values")
    analysis.add_argument("--supercluster-min", type=int)
    analysis.add_argument("--supercluster-max", type=int)
    analysis.add_argument("--fraction", type=float)
    analysis.add_argument("--large-threshold", type=int)
    analysis.add_argument("--range", dest="ordinal_range", type=_interval, help="ordinal interval START:END")
    analysis.add_argument("--time-range", type=_interval, help="unix time interval START:END")
    analysis.add_argument("--top-n", type=int)
    analysis.add_argument("--rank-by", choices=["size", "received"])
    analysis.add_argument("--clusters", type=_int_list, help="explicit comma-separated representatives")
    analysis.add_argument("--min-flow", type=int)
    analysis.add_argument("--self-loops", action="store_const", const=True)
    analysis.add_argument("--tags", type=Path, help="CSV tag file address,label,category")
    analysis.add_argument("--cluster", type=int, help="representative for the structure graph")

    output = common.add_argument_group("output")
    output.add_argument("--out", type=Path, help="artifact directory")
    output.add_argument("--snapshot", type=Path, help="snapshot file")
    output.add_argument("--database-url")
    output.add_argument("--log-level", default=settings.LOG_LEVEL)
    output.add_argument("--log-json", action="store_true", default=settings.LOG_JSON)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="address-clusters", description="Multi-input heuristic address clustering")
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True)

    for name, handler, help_text in COMMANDS:
        cmd = sub.add_parser(name, parents=[common], help=help_text)
        cmd.set_defaults(handler=handler)
        if name == "synth":
            cmd.add_argument("--emit-format", choices=["text", "binary"], default="text")
        if name == "resume":
            cmd.add_argument("--save-snapshot", type=Path, help="write the resumed engine here")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = set(RunConfig.model_fields)
    flags: Dict[str, Any] = {key: value for key, value in vars(args).items() if key in fields}
    flags["synth"] = {
        name: getattr(args, f"synth_{name}")
        for name in _SYNTH_FLAGS
        if getattr(args, f"synth_{name}") is not None
    }
    return load_run_config(args.config, flags)


# stream reading

def _check_inputs(config: RunConfig) -> None:
    if config.format == "synthetic":
        return
    if not config.inputs:
        raise ConfigError("no --input given")
    for path in config.inputs:
        if not path.is_file():
            raise FileNotFoundError(f"input file not found: {path}")


def iter_records(config: RunConfig, start_ordinal: int = 0) -> Iterator[TxRecord]:
    """Records of every input in order, numbered from start_ordinal."""
    if config.format == "synthetic":
        yield from itertools.islice(SyntheticChain(config.synth), start_ordinal, None)
        return
    parse = parse_binary if config.format == "binary" else parse_text
    ordinal = start_ordinal
    for path in config.inputs:
        with open(path, "rb") as stream:
            for tx in parse(stream, ordinal):
                ordinal = tx.ordinal + 1
                yield tx


def _cluster(engine: ClusterEngine, config: RunConfig, start_ordinal: int = 0) -> float:
    records = iter_pipelined(iter_records(config, start_ordinal), settings.PIPELINE_QUEUE_SIZE)
    started = time.perf_counter()
    try:
        engine.process_stream(records, progress_every=settings.PROGRESS_EVERY)
    finally:
        records.close()
    return time.perf_counter() - started


def build_engine(config: RunConfig) -> Tuple[ClusterEngine, float]:
    _check_inputs(config)
    engine = ClusterEngine(strict=config.strict)
    elapsed = _cluster(engine, config)
    return engine, elapsed


def _print_summary(engine: ClusterEngine, config: RunConfig, elapsed: float) -> None:
    stats = summary(engine, config)
    rate = stats["transactions"] / elapsed if elapsed > 0 else float("inf")
    print(f"transactions:       {stats['transactions']}")
    print(f"addresses:          {stats['addresses']}")
    print(f"clusters (>= 2):    {stats['clusters_ge2']}")
    print(f"super-clusters:     {stats['superclusters']}")
    print(f"merge events:       {stats['merge_events']}")
    print(f"clustering rate:    {rate:,.0f} tx/s")


def _write(config: RunConfig, engine: ClusterEngine, writers: Sequence[Callable]) -> None:
    with ArtifactStage(config.out) as stage:
        for writer in writers:
            writer(stage, engine, config)


def _full_writers(engine: ClusterEngine) -> List[Callable]:
    if not engine.tx_count:
        logger.warning("Empty stream: skipping anomaly flags and structure graph")
        skipped = (write_flags, write_structure)
    elif not engine.addresses:
        logger.warning("Stream holds no addresses: skipping structure graph")
        skipped = (write_structure,)
    else:
        return list(ALL_WRITERS)
    return [w for w in ALL_WRITERS if w not in skipped]


# subcommands

def cmd_run(config: RunConfig, args: argparse.Namespace) -> int:
    engine, elapsed = build_engine(config)
    _write(config, engine, _full_writers(engine))
    if config.snapshot:
        snapshot(engine, config.snapshot)
    _print_summary(engine, config, elapsed)
    return 0


def cmd_resume(config: RunConfig, args: argparse.Namespace) -> int:
    if config.snapshot is None:
        raise ConfigError("resume needs --snapshot")
    _check_inputs(config)
    engine = restore(config.snapshot)
    if args.strict is not None:
        engine.strict = config.strict
    resumed_at = engine.tx_count
    elapsed = _cluster(engine, config, start_ordinal=resumed_at)
    logger.info(f"Resumed at transaction {resumed_at}, now at {engine.tx_count}")
    _write(config, engine, _full_writers(engine))
    if args.save_snapshot:
        snapshot(engine, args.save_snapshot)
    _print_summary(engine, config, elapsed)
    return 0


def cmd_ingest_check(config: RunConfig, args: argparse.Namespace) -> int:
    _check_inputs(config)
    count = sum(1 for _ in iter_records(config))
    print(f"{count} records parsed and validated")
    return 0


def cmd_snapshot(config: RunConfig, args: argparse.Namespace) -> int:
    if config.snapshot is None:
        raise ConfigError("snapshot needs --snapshot")
    engine, elapsed = build_engine(config)
    snapshot(engine, config.snapshot)
    _print_summary(engine, config, elapsed)
    return 0


def cmd_synth(config: RunConfig, args: argparse.Namespace) -> int:
    chain = SyntheticChain(config.synth)
    suffix = "jsonl" if args.emit_format == "text" else "bin"
    with ArtifactStage(config.out) as stage:
        with open(stage.path(f"synthetic.{suffix}"), "wb") as stream:
            if args.emit_format == "text":
                count = write_text(stream, chain)
            else:
                count = write_binary(stream, chain, config.synth.num_transactions)
        stage.write_bytes("injected_ordinals.txt", "".join(f"{o}\n" for o in chain.injected_ordinals).encode())
    print(f"{count} synthetic transactions written to {config.out}")
    return 0


def cmd_export_db(config: RunConfig, args: argparse.Namespace) -> int:
    engine, elapsed = build_engine(config)
    url = config.database_url or settings.DATABASE_URL
    create_tables(url)
    tags = load_tags(config.tags) if config.tags else None
    session = make_session_factory(url)()
    try:
        counts = persist_results(session, engine, tags, min_size=2)
    finally:
        session.close()
    print(f"exported {counts['clusters']} clusters and {counts['merge_events']} merge events to {url}")
    return 0


def _single(writer: Callable) -> Callable[[RunConfig, argparse.Namespace], int]:
    def handler(config: RunConfig, args: argparse.Namespace) -> int:
        engine, elapsed = build_engine(config)
        _write(config, engine, [writer])
        _print_summary(engine, config, elapsed)
        return 0
    handler.__name__ = f"cmd_{writer.__name__}"
    return handler


COMMANDS = [
    ("run", cmd_run, "full pipeline, every artifact"),
    ("ingest-check", cmd_ingest_check, "parse and validate the input only"),
    ("cluster", _single(write_clusters), "cluster table and summary"),
    ("metrics", _single(write_metrics), "windowed counts and ratio series"),
    ("histogram", _single(write_histogram), "decade histogram of cluster sizes"),
    ("quantiles", _single(write_quantiles), "windowed quantiles of merge increases"),
    ("superclusters", _single(write_superclusters), "super-cluster statistics"),
    ("flag", _single(write_flags), "anomalous merges and clusters"),
    ("structure", _single(write_structure), "bipartite graph of one cluster"),
    ("flows", _single(write_flows), "inter-cluster flow graph"),
    ("snapshot", cmd_snapshot, "cluster the stream and write a snapshot"),
    ("resume", cmd_resume, "restore a snapshot and process the rest of the stream"),
    ("synth", cmd_synth, "write a synthetic stream"),
    ("export-db", cmd_export_db, "write clusters and merge events to the results database"),
]


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_json)
    try:
        config = config_from_args(args)
        return args.handler(config, args)
    except AddressClusterError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O error: {e}")
        return IO_ERROR_EXIT
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
