"""Single entry point exposing the pipeline as subcommands.

Exit codes: 0 success, 2 usage error, 3 data error, 4 programmer transport
error.  Scores print x100 with one decimal; machine-readable output stays in
[0, 1].  All randomness flows from --seed, and every run writes a metadata
record next to its primary output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .dataio import (
    DataError,
    DatasetManifest,
    build_edit_dataset,
    edit_tuple_to_record,
    load_dfoil,
    load_error_annotations,
    load_edit_tuples,
    load_instances,
)
from .edits import CorruptionConfig, as_edit_tuple, derive_edits
from .evalsuite import (
    DegenerateInput,
    RankedPair,
    corpus_stats,
    dfoil_accuracy,
    kendall_tau_b,
    select_diverse,
    spearman_rho,
    tfidf_retrieve,
)
from .graph import DEFAULT_POLICY, StrictParseError, canonicalize, parse_graph, serialize_graph
from .merge import FileSentenceParser, MissingSentenceGraphs, generate_initial
from .metrics import SynonymLexicon, score_graphs
from .refine import (
    EditActions,
    OracleProgrammer,
    ProgrammerUnavailable,
    RefinementConfig,
    RemoteProgrammer,
    ReplayProgrammer,
    heuristic_programmer,
    refine,
)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRANSPORT = 4

ENDPOINT_ENV = "SG_PROGRAMMER_ENDPOINT"


def _write_run_metadata(out_dir: Path, args: argparse.Namespace, started: float):
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "version": __version__,
        "command": args.command,
        "config": {k: v for k, v in vars(args).items() if k != "func"},
        "seed": getattr(args, "seed", None),
        "elapsed_s": round(time.time() - started, 3),
    }
    with open(out_dir / "run_metadata.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _pct(x: float) -> str:
    return f"{100.0 * x:.1f}"


def _make_programmer(args, inst, instances_by_id, replay_tuples):
    if args.programmer == "heuristic":
        return heuristic_programmer
    if args.programmer == "oracle":
        if inst.gold_graph is None:
            raise DataError(f"instance {inst.id!r} has no gold graph for the oracle programmer")
        return OracleProgrammer(inst.gold_graph)
    if args.programmer == "replay":
        rows = replay_tuples.get(inst.id, [])
        actions = [
            EditActions(
                tuple(t in set(row.delete_gt) for t in row.initial_graph.triples),
                row.insert_gt,
                flagged_triples=row.initial_graph.triples,
            )
            for row in rows
        ]
        return ReplayProgrammer(actions)
    if args.programmer == "remote":
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise SystemExit(EXIT_USAGE)
        return RemoteProgrammer(endpoint, instance_id=inst.id)
    raise SystemExit(EXIT_USAGE)


def cmd_parse(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8").strip() if args.input else args.text
    g = parse_graph(text, args.mode)
    g = canonicalize(g, DEFAULT_POLICY)
    print(serialize_graph(g))
    for unit in g.malformed_units:
        print(f"malformed: {unit}", file=sys.stderr)
    return 0


def cmd_merge(args) -> int:
    instances = load_instances(args.input)
    parser = FileSentenceParser(args.sentence_graphs) if args.sentence_graphs else None
    with open(args.output, "w", encoding="utf-8") as fh:
        for inst in instances:
            result = generate_initial(inst, parser)
            fh.write(
                json.dumps({"id": inst.id, "graph": serialize_graph(result.graph)}) + "\n"
            )
    return 0


def cmd_derive_edits(args) -> int:
    instances = load_instances(args.input)
    parser = FileSentenceParser(args.sentence_graphs) if args.sentence_graphs else None
    with open(args.output, "w", encoding="utf-8") as fh:
        for inst in instances:
            if inst.gold_graph is None:
                raise DataError(f"instance {inst.id!r} has no gold graph")
            initial = generate_initial(inst, parser).graph
            row = as_edit_tuple(inst.id, inst.caption, initial, inst.gold_graph)
            fh.write(json.dumps(edit_tuple_to_record(row)) + "\n")
    return 0


def cmd_corrupt(args) -> int:
    instances = load_instances(args.input)
    cfg = CorruptionConfig(
        n_variants=args.variants,
        delete_fraction=args.delete_fraction,
        insert_fraction=args.insert_fraction,
        insertion_pool=args.pool,
        seed=args.seed,
    )
    rows = build_edit_dataset(instances, cfg, args.output, include_merged=args.include_merged)
    print(f"wrote {rows} rows to {args.output}")
    manifest = DatasetManifest(name=Path(args.output).stem, splits={"train": rows})
    manifest.save(Path(args.output).with_suffix(".manifest.json"))
    return 0


def cmd_refine(args) -> int:
    instances = load_instances(args.input)
    parser = FileSentenceParser(args.sentence_graphs) if args.sentence_graphs else None
    cfg = RefinementConfig(iterations=args.iterations, stop_on_empty_edits=not args.no_early_stop)
    replay_tuples = {}
    if args.programmer == "replay":
        if not args.edits:
            print("replay programmer requires --edits", file=sys.stderr)
            return EXIT_USAGE
        for row in load_edit_tuples(args.edits):
            replay_tuples.setdefault(row.id.split("#")[0], []).append(row)
    trace_dir = Path(args.trace) if args.trace else None
    if trace_dir:
        trace_dir.mkdir(parents=True, exist_ok=True)
    with open(args.output, "w", encoding="utf-8") as fh:
        for inst in instances:
            if inst.sentence_graphs is not None or parser is not None:
                y0 = generate_initial(inst, parser).graph
            elif replay_tuples.get(inst.id):
                y0 = replay_tuples[inst.id][0].initial_graph
            else:
                raise MissingSentenceGraphs(f"no initial graph source for {inst.id!r}")
            programmer = _make_programmer(args, inst, None, replay_tuples)
            final, trace = refine(inst, y0, cfg, programmer)
            if trace.degraded:
                raise ProgrammerUnavailable(f"programmer failed for instance {inst.id!r}")
            fh.write(json.dumps({"id": inst.id, "graph": serialize_graph(final)}) + "\n")
            if trace_dir:
                _dump_trace(trace_dir / f"{inst.id}.json", trace)
    return 0


def _dump_trace(path: Path, trace) -> None:
    steps = [
        {
            "graph": serialize_graph(s.graph),
            "deletes_proposed": s.deletes_proposed,
            "deletes_applied": s.deletes_applied,
            "inserts_proposed": s.inserts_proposed,
            "inserts_accepted": s.inserts_accepted,
            "inserts_rejected": s.inserts_rejected,
            "wall_time": s.wall_time,
        }
        for s in trace.steps
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"degraded": trace.degraded, "steps": steps}, fh, indent=2)


def _load_graphs_by_id(path):
    graphs = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            graphs[record["id"]] = canonicalize(
                parse_graph(record["graph"], "strict"), DEFAULT_POLICY
            )
    return graphs


def cmd_score(args) -> int:
    pred = _load_graphs_by_id(args.pred)
    gold = _load_graphs_by_id(args.gold)
    lex = SynonymLexicon.load(args.lexicon) if args.lexicon else None
    shared = [i for i in pred if i in gold]
    if not shared:
        raise DataError("no shared instance ids between pred and gold files")
    rows = []
    for inst_id in shared:
        report = score_graphs(pred[inst_id], gold[inst_id], lex)
        rows.append((inst_id, report))
        if args.metric == "spice":
            print(f"{inst_id}\tF1={_pct(report.f1)}\tP={_pct(report.precision)}\tR={_pct(report.recall)}")
        else:
            print(f"{inst_id}\tBSSPICE={_pct(report.bsspice)}")
    if args.metric == "spice":
        mean = sum(r.f1 for _, r in rows) / len(rows)
        print(f"mean\tF1={_pct(mean)}")
    else:
        mean = sum(r.bsspice for _, r in rows) / len(rows)
        print(f"mean\tBSSPICE={_pct(mean)}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            for inst_id, r in rows:
                fh.write(
                    json.dumps(
                        {
                            "id": inst_id,
                            "precision": r.precision,
                            "recall": r.recall,
                            "f1": r.f1,
                            "soft_forward": r.soft_forward,
                            "soft_backward": r.soft_backward,
                            "bsspice": r.bsspice,
                        }
                    )
                    + "\n"
                )
    return 0


def cmd_stats(args) -> int:
    instances = load_instances(args.input)
    s = corpus_stats(instances)
    header = f"{'# Inst.':>8} {'Avg Len':>8} {'Avg Trp':>8} {'Avg Obj':>8} {'Avg Rel':>8} {'Total Trp':>10}"
    row = (
        f"{s.n_instances:>8} {s.avg_len:>8.2f} {s.avg_triples:>8.2f} "
        f"{s.avg_objects:>8.2f} {s.avg_relations:>8.2f} {s.total_triples:>10}"
    )
    print(header)
    print(row)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(s.__dict__, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_eval_rank(args) -> int:
    metric, reference = [], []
    with open(args.input, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            metric.append(float(record["metric"]))
            reference.append(float(record["reference"]))
    pairs = RankedPair(tuple(metric), tuple(reference))
    tau = kendall_tau_b(pairs)
    rho = spearman_rho(pairs)
    print(f"kendall_tau_b\t{100.0 * tau:.1f}")
    print(f"spearman_rho\t{100.0 * rho:.1f}")
    return 0


def cmd_eval_dfoil(args) -> int:
    items = load_dfoil(args.input)
    lex = SynonymLexicon.load(args.lexicon) if args.lexicon else None
    accuracy, ties = dfoil_accuracy(items, scorer=args.metric, lex=lex)
    print(f"accuracy\t{_pct(accuracy)}")
    print(f"ties\t{ties}")
    return 0


def cmd_error_rates(args) -> int:
    annotations = load_error_annotations(args.input)
    for category, rate in error_rates_table(annotations):
        print(f"{category}\t{rate:.1f}")
    return 0


def error_rates_table(annotations):
    from .evalsuite import error_rates

    rates = error_rates(annotations)
    return [
        ("cross", rates["cross_sentence_coreference"]),
        ("long", rates["long_range_dependency"]),
        ("implicit", rates["implicit_inference"]),
        ("coherence", rates["graph_coherence"]),
    ]


def cmd_retrieve(args) -> int:
    corpus = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    corpus = [line for line in corpus if line.strip()]
    if args.diverse:
        indices = select_diverse(corpus, args.k, seed=args.seed)
    else:
        indices = tfidf_retrieve(args.query, corpus, args.k)
    for i in indices:
        print(f"{i}\t{corpus[i]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgrefine", description="Discourse scene-graph toolkit"
    )
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a flattened graph string")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--input")
    p.add_argument("--mode", choices=("strict", "lenient"), default="lenient")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("merge", help="merge per-sentence graphs into initial graphs")
    p.add_argument("--input", required=True)
    p.add_argument("--sentence-graphs")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("derive-edits", help="derive gold edits from initial/gold pairs")
    p.add_argument("--input", required=True)
    p.add_argument("--sentence-graphs")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_derive_edits)

    p = sub.add_parser("corrupt", help="build the edit-supervision dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--variants", type=int, default=15)
    p.add_argument("--delete-fraction", type=float, default=1 / 3)
    p.add_argument("--insert-fraction", type=float, default=1 / 3)
    p.add_argument("--pool", choices=("corpus", "perturb"), default="corpus")
    p.add_argument("--include-merged", action="store_true")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("refine", help="iteratively refine initial graphs")
    p.add_argument("--input", required=True)
    p.add_argument("--sentence-graphs")
    p.add_argument("--output", required=True)
    p.add_argument(
        "--programmer",
        choices=("heuristic", "oracle", "replay", "remote"),
        default="heuristic",
    )
    p.add_argument("--endpoint")
    p.add_argument("--edits", help="edit-tuple JSONL for the replay programmer")
    p.add_argument("--iterations", type=int, default=2)
    p.add_argument("--no-early-stop", action="store_true")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("score", help="score predicted graphs against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--metric", choices=("spice", "bsspice"), default="spice")
    p.add_argument("--lexicon")
    p.add_argument("--output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("stats", help="corpus statistics table")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval-rank", help="rank correlations against reference scores")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_eval_rank)

    p = sub.add_parser("eval-dfoil", help="paired hallucination accuracy")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", choices=("spice", "bsspice"), default="spice")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_eval_dfoil)

    p = sub.add_parser("error-rates", help="discourse error-annotation tallies")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_error_rates)

    p = sub.add_parser("retrieve", help="TF-IDF retrieval / diverse selection")
    p.add_argument("--corpus", required=True)
    p.add_argument("--query", default="")
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--diverse", action="store_true")
    p.set_defaults(func=cmd_retrieve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    started = time.time()
    try:
        status = args.func(args)
    except (DataError, StrictParseError, MissingSentenceGraphs, DegenerateInput, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ProgrammerUnavailable as exc:
        print(f"programmer transport error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except SystemExit as exc:
        return int(exc.code or 0)
    out = getattr(args, "output", None)
    if out:
        _write_run_metadata(Path(out).parent if Path(out).parent.name else Path("."), args, started)
    return status


if __name__ == "__main__":
    sys.exit(main())
