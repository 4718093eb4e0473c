"""Command-line interface.

Exit codes: 0 on success, 1 for usage errors, 2 for data errors
(unreadable or malformed inputs, missing embeddings, absent models).
All file outputs are written atomically.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from types import MappingProxyType

from . import __version__
from .blocking import (
    Block,
    IndexFormatError,
    assemble_block,
    build_name_index,
    load_index,
    load_split,
    save_index,
    save_split,
    split_block,
)
from .dblp import DblpParseError, ParseStats, parse_dblp_stream
from .embeddings import (
    HashingNameEmbedder,
    MissingEmbedding,
    Providers,
    StoreFormatError,
    StoreProvider,
    load_store,
    save_store,
)
from .evaluation import evaluate_block, format_report
from .inference import (
    ModelRegistry,
    ModelUnavailable,
    SingleModel,
    format_resolution,
    resolve,
    resolve_batch,
)
from .network import CheckpointError, checkpoint_load
from .records import (
    RecordFormatError,
    read_records,
    record_from_json,
    write_records,
)
from .stats import (
    compute_block_stats,
    corpus_counts,
    histogram_as_text,
    name_frequency_histogram,
)
from .synth import build_text_store, generate_corpus, parse_synth_spec, write_truth
from .training import load_train_config, train_block
from .records import variate_of_name

_DATA_ERRORS = (
    DblpParseError,
    RecordFormatError,
    IndexFormatError,
    StoreFormatError,
    CheckpointError,
    MissingEmbedding,
    ModelUnavailable,
    FileNotFoundError,
    NotADirectoryError,
    IsADirectoryError,
    PermissionError,
    ValueError,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; this tool reserves 2 for data errors
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="namelink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse bibliographic XML into canonical records")
    p.add_argument("xml", help="DBLP-style XML file")
    p.add_argument("-o", "--output", required=True, help="records output (JSON lines)")
    p.add_argument(
        "--kinds",
        default="article,inproceedings",
        help="comma-separated element names to ingest",
    )
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="corpus or block statistics")
    p.add_argument("records", help="canonical records file")
    p.add_argument("--anv", help="restrict to the block of this name variate")
    p.add_argument(
        "--histograms", action="store_true", help="also print name frequency tables"
    )
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("index", help="build the name-to-author index")
    p.add_argument("records", help="canonical records file")
    p.add_argument("-o", "--output", required=True, help="index output path")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("train", help="train per-block classifiers")
    p.add_argument("records", help="canonical records file")
    p.add_argument("index", help="name index file")
    p.add_argument("--config", required=True, help="key=value training config")
    p.add_argument("--embeddings", required=True, help="contextual embedding store")
    p.add_argument(
        "--name-embeddings",
        help="character-level name store (default: builtin hashing embedder)",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--anv", help="train the block of this variate")
    group.add_argument(
        "--top-n", type=int, metavar="K", help="train the K most ambiguous blocks"
    )
    p.add_argument("-o", "--output", required=True,
                   help="checkpoint path (--anv) or model directory (--top-n)")
    p.add_argument("--workers", type=int, default=1, help="concurrent block trainings")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="resolve author names on query records")
    p.add_argument("checkpoint", help="trained block checkpoint")
    p.add_argument("index", help="name index file")
    p.add_argument("--embeddings", required=True, help="contextual embedding store")
    p.add_argument("--name-embeddings", help="character-level name store")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--record", help="one canonical record as a JSON line")
    group.add_argument("--batch", help="file of target<TAB>record_json lines")
    p.add_argument("--target", help="author name to resolve (with --record)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="score a trained block on its test split")
    p.add_argument("checkpoint", help="trained block checkpoint")
    p.add_argument("records", help="canonical records file")
    p.add_argument("split", help="split assignment file")
    p.add_argument("--embeddings", required=True, help="contextual embedding store")
    p.add_argument("--name-embeddings", help="character-level name store")
    p.add_argument("--mode", choices=("all", "anv"), default="all")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic benchmark corpus")
    p.add_argument("spec", help="key=value corpus spec file")
    p.add_argument("-o", "--output", required=True, help="records output (JSON lines)")
    p.add_argument("--truth", help="ground truth output (default: <output>.truth)")
    p.add_argument("--store", help="also build a contextual store at this path")
    p.add_argument("--store-dim", type=int, default=64, help="store width")
    p.set_defaults(func=_cmd_synth)

    return parser


def _providers(args: argparse.Namespace) -> Providers:
    texts = StoreProvider(load_store(args.embeddings))
    if getattr(args, "name_embeddings", None):
        names = StoreProvider(load_store(args.name_embeddings, provenance="charlevel"))
    else:
        names = HashingNameEmbedder()
    return Providers(names=names, texts=texts)


def _cmd_ingest(args: argparse.Namespace) -> int:
    kinds = frozenset(k.strip() for k in args.kinds.split(",") if k.strip())
    if not kinds:
        raise ValueError("--kinds must name at least one element")
    stats = ParseStats()
    count = write_records(args.output, parse_dblp_stream(args.xml, kinds, stats))
    print(f"records\t{count}")
    print(f"skipped_no_title\t{stats.skipped_no_title}")
    print(f"skipped_no_authors\t{stats.skipped_no_authors}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    if args.anv:
        block_records = [
            r
            for r in read_records(args.records)
            if any(variate_of_name(a.display_name) == args.anv for a in r.authors)
        ]
        stats = compute_block_stats(block_records, args.anv)
        for name in ("uta", "rcd", "uca", "uan", "r2a", "r3a"):
            print(f"{name}\t{getattr(stats, name)}")
    else:
        counts = corpus_counts(read_records(args.records))
        print(f"records\t{counts.records}")
        print(f"authors\t{counts.authors}")
        print(f"names\t{counts.names}")
        print(f"variates\t{counts.variates}")
    if args.histograms:
        tables = name_frequency_histogram(read_records(args.records))
        print()
        print(histogram_as_text(tables.authors_per_name, "authors_per_name"))
        print()
        print(histogram_as_text(tables.authors_per_variate, "authors_per_variate"))
        print()
        print(histogram_as_text(tables.records_per_name, "records_per_name"))
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    index = build_name_index(read_records(args.records))
    save_index(args.output, index)
    print(f"names\t{index.num_names}")
    print(f"variates\t{index.num_variates}")
    print(f"authors\t{index.num_authors}")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    config = load_train_config(args.config)
    providers = _providers(args)
    records = list(read_records(args.records))
    index = load_index(args.index)

    if args.anv is not None:
        anvs = [args.anv]
        out_dir = None
    else:
        if args.top_n < 1:
            raise ValueError("--top-n must be at least 1")
        ranked = sorted(
            (
                name
                for name in index.variate_names
                if len(index.candidates(name)) >= 2
            ),
            key=lambda name: (-len(index.candidates(name)), name),
        )
        anvs = ranked[: args.top_n]
        out_dir = Path(args.output)
        out_dir.mkdir(parents=True, exist_ok=True)

    registry = ModelRegistry(out_dir) if out_dir is not None else None

    def train_one(anv: str) -> str:
        try:
            block = assemble_block(anv, records, index)
        except ValueError as exc:
            if "at least two" in str(exc):
                return f"skipped\t{anv}\t{exc}"
            raise
        split = split_block(block, seed=config.seed)
        if registry is not None:
            ckpt_path = registry.path_for(anv)
        else:
            ckpt_path = Path(args.output)
        result = train_block(
            block,
            split,
            providers,
            config,
            checkpoint_path=ckpt_path,
            history_path=Path(str(ckpt_path) + ".history"),
        )
        save_split(Path(str(ckpt_path) + ".split"), split)
        return (
            f"trained\t{anv}\tclasses={len(block.authors)}"
            f"\ttrain={result.train_samples}\tval={result.val_samples}"
            f"\tepochs={len(result.history)}\tcheckpoint={ckpt_path}"
        )

    if args.workers > 1 and len(anvs) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for line in pool.map(train_one, anvs):
                print(line)
    else:
        for anv in anvs:
            print(train_one(anv))
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    providers = _providers(args)
    params = checkpoint_load(args.checkpoint)
    index = load_index(args.index)
    model = SingleModel(params)
    if args.record is not None:
        if not args.target:
            raise ValueError("--record requires --target")
        record = record_from_json(args.record)
        print(format_resolution(resolve(record, args.target, index, model, providers)))
    else:
        with open(args.batch, "r", encoding="utf-8") as handle:
            for line in resolve_batch(handle, index, model, providers):
                print(line)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    providers = _providers(args)
    params = checkpoint_load(args.checkpoint)
    class_of = MappingProxyType({key: i for i, key in enumerate(params.classes)})
    kept = [
        r
        for r in read_records(args.records)
        if any(a.author_key in class_of for a in r.authors)
    ]
    if not kept:
        raise ValueError(
            f"no records match the {len(params.classes)} authors of the checkpoint"
        )
    block = Block(
        anv=params.anv,
        authors=tuple(params.classes),
        records=tuple(kept),
        class_of=class_of,
    )
    split = load_split(args.split)
    report = evaluate_block(params, block, split, providers, mode=args.mode)
    print(format_report(report))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = parse_synth_spec(Path(args.spec).read_text(encoding="utf-8"))
    records, truth = generate_corpus(spec)
    count = write_records(args.output, records)
    truth_path = args.truth or f"{args.output}.truth"
    write_truth(truth_path, truth)
    print(f"records\t{count}")
    print(f"authors\t{spec.authors}")
    print(f"truth\t{truth_path}")
    if args.store:
        store = build_text_store(records, dim=args.store_dim, seed=spec.seed)
        save_store(args.store, store)
        print(f"store\t{args.store}\tdim={args.store_dim}\tkeys={len(store)}")
    return 0


def run(argv: list[str] | None = None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 0
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"namelink: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
