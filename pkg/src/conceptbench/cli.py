"""Command-line interface: every service operation without the UI.

Standalone commands (ingest, ontology check, context build, fca, tca, esom,
hmm) work directly on files; session commands (session create, phase run,
export, report, serve) drive the same code through the session store.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import esom as esom_mod
from . import fca as fca_mod
from . import hmm as hmm_mod
from . import tca as tca_mod
from .context import build_context, context_from_json, context_to_burmeister, context_to_json
from .corpus.index import build_index, index_to_json
from .corpus.model import CANONICAL_SECTIONS, load_documents
from .errors import ConceptBenchError
from .ontology import parse_ontology
from .service.endpoints import DATA_DIR_ENV
from .service.manager import SessionManager
from .service.profiles import Profile


def _write(path: str | None, payload: bytes) -> None:
    if path in (None, "-"):
        sys.stdout.buffer.write(payload)
    else:
        with open(path, "wb") as fh:
            fh.write(payload)


def _read(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load_inputs(args):
    corpus = load_documents(args.corpus)
    ontology = parse_ontology(_read(args.ontology))
    sections = set(args.sections.split(",")) if args.sections \
        else set(CANONICAL_SECTIONS)
    index = build_index(corpus, sections)
    return corpus, ontology, index


def cmd_ingest(args) -> int:
    corpus = load_documents(args.corpus)
    sections = set(args.sections.split(",")) if args.sections \
        else set(CANONICAL_SECTIONS)
    index = build_index(corpus, sections)
    if args.out:
        _write(args.out, index_to_json(index))
    print(f"ingested {len(corpus)} documents ({corpus.language}); "
          f"{len(index.postings)} index terms")
    return 0


def cmd_ontology_check(args) -> int:
    ontology = parse_ontology(_read(args.ontology))
    print(f"ontology ok: {len(ontology.clusters)} clusters, "
          f"{len(ontology.attributes)} attributes, "
          f"{len(ontology.object_cluster_rules)} object-cluster rules, "
          f"{len(ontology.segmentation_rules)} segmentation rules")
    return 0


def cmd_context_build(args) -> int:
    corpus, ontology, index = _load_inputs(args)
    attrs = [ontology.attribute(name)
             for name in args.attributes.split(",")]
    ctx = build_context(corpus, attrs, index)
    if args.format == "burmeister":
        _write(args.out, context_to_burmeister(ctx))
    else:
        _write(args.out, context_to_json(ctx))
    print(f"context: {len(ctx.objects)} objects x "
          f"{len(ctx.attributes)} attributes", file=sys.stderr)
    return 0


def cmd_fca(args) -> int:
    ctx = context_from_json(_read(args.context))
    concepts = fca_mod.compute_concepts(ctx, args.max_concepts)
    lattice = fca_mod.build_lattice(ctx, concepts)
    _write(args.out, fca_mod.export_lattice(lattice, args.format))
    print(f"lattice: {len(concepts)} concepts, "
          f"{len(lattice.covering)} covers", file=sys.stderr)
    return 0


def cmd_tca(args) -> int:
    corpus, ontology, index = _load_inputs(args)
    ctx = context_from_json(_read(args.context))
    rule = ontology.object_cluster_rules.get(args.entity_key)
    if rule is None:
        raise ConceptBenchError(
            f"unknown object-cluster rule: {args.entity_key}")
    systems = tca_mod.build_time_system(corpus, rule, args.granularity)
    concepts = fca_mod.compute_concepts(ctx)
    lattice = fca_mod.build_lattice(ctx, concepts)
    tracks = tca_mod.compute_life_tracks(systems, lattice, ctx)
    _write(args.out, tca_mod.export_tracks(lattice, tracks))
    print(f"tracks: {len(tracks)} entities", file=sys.stderr)
    return 0


def cmd_esom(args) -> int:
    ctx = context_from_json(_read(args.context))
    vectors = esom_mod.vectors_from_context(ctx)
    rows, cols = args.rows, args.cols
    if args.emergent:
        rows, cols = esom_mod.EMERGENT_ROWS, esom_mod.EMERGENT_COLS
    grid = esom_mod.init_grid(rows, cols, args.topology,
                              dim=len(ctx.attributes), seed=args.seed)
    schedule = esom_mod.TrainingSchedule(
        epochs=args.epochs, rate_start=args.rate_start,
        rate_end=args.rate_end, radius_start=args.radius_start,
        radius_end=args.radius_end)
    trained = esom_mod.train(grid, vectors, schedule)
    urls = {obj.id: obj.url for obj in ctx.objects}
    _write(args.out, esom_mod.export_map(
        trained, vectors, urls, schedule.validate(rows, cols)))
    if args.checkpoint:
        _write(args.checkpoint, esom_mod.grid_to_checkpoint(trained))
    print(f"map: {rows}x{cols} {args.topology}", file=sys.stderr)
    return 0


def cmd_hmm(args) -> int:
    corpus, ontology, index = _load_inputs(args)
    rule = ontology.object_cluster_rules.get(args.entity_key)
    if rule is None:
        raise ConceptBenchError(
            f"unknown object-cluster rule: {args.entity_key}")
    groups = json.loads(_read(args.symbol_groups)) \
        if args.symbol_groups else None
    symbol_map = hmm_mod.SymbolMap(symbols=tuple(args.symbols.split(",")),
                                   source_field=args.symbol_field,
                                   groups=groups, unmapped=args.unmapped)
    sequences = hmm_mod.sequences_from_corpus(corpus, rule, symbol_map,
                                              index)
    trace = None
    if args.mode == "process":
        model = hmm_mod.fit_process_model(
            sequences, len(symbol_map.symbols), smoothing=args.smoothing,
            symbol_names=symbol_map.symbols)
    else:
        model, trace = hmm_mod.baum_welch(
            sequences, args.n_states, len(symbol_map.symbols),
            seed=args.seed, tol=args.tol, max_iter=args.max_iter)
    if args.format == "dot":
        _write(args.out, hmm_mod.export_hmm_graph(model, args.threshold,
                                                  "dot"))
    else:
        _write(args.out, hmm_mod.model_to_json(model, trace))
        if args.graph:
            _write(args.graph, hmm_mod.export_hmm_graph(
                model, args.threshold, "json"))
    print(f"model: {model.n_states} states, {model.n_symbols} symbols",
          file=sys.stderr)
    return 0


def _manager(args) -> SessionManager:
    data_dir = args.data_dir or os.environ.get(DATA_DIR_ENV,
                                               "./conceptbench-data")
    return SessionManager(data_dir)


def cmd_session_create(args) -> int:
    manager = _manager(args)
    session = manager.create_session(_read(args.corpus),
                                     _read(args.ontology),
                                     session_id=args.id)
    print(session.id)
    return 0


def cmd_phase_run(args) -> int:
    manager = _manager(args)
    profile = Profile.from_dict(json.loads(_read(args.profile)))
    result = manager.run_phase(args.session, profile)
    print(json.dumps(result))
    return 0


def cmd_export(args) -> int:
    manager = _manager(args)
    payload, _ = manager.get_artifact(args.session, args.artifact,
                                      args.format)
    _write(args.out, payload)
    return 0


def cmd_report(args) -> int:
    from .report import write_report

    manager = _manager(args)
    written = write_report(manager, args.session, args.out,
                           top_terms=args.top_terms)
    for name in written:
        print(name)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(args.data_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptbench",
        description="Concept-discovery workbench: lattices, life tracks, "
                    "topographic maps, process models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a corpus XML and build an index")
    p.add_argument("corpus")
    p.add_argument("--sections", help="comma-separated section names")
    p.add_argument("--out", help="write the index JSON here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("ontology", help="ontology tools")
    onto_sub = p.add_subparsers(dest="subcommand", required=True)
    pc = onto_sub.add_parser("check", help="parse and validate an ontology")
    pc.add_argument("ontology")
    pc.set_defaults(func=cmd_ontology_check)

    p = sub.add_parser("context", help="cross-table tools")
    ctx_sub = p.add_subparsers(dest="subcommand", required=True)
    pb = ctx_sub.add_parser("build", help="build a formal context")
    pb.add_argument("--corpus", required=True)
    pb.add_argument("--ontology", required=True)
    pb.add_argument("--attributes", required=True,
                    help="comma-separated attribute names, in order")
    pb.add_argument("--sections")
    pb.add_argument("--format", choices=["json", "burmeister"],
                    default="json")
    pb.add_argument("--out", default="-")
    pb.set_defaults(func=cmd_context_build)

    p = sub.add_parser("fca", help="enumerate concepts and build the lattice")
    p.add_argument("--context", required=True)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--max-concepts", type=int,
                   default=fca_mod.DEFAULT_MAX_CONCEPTS)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fca)

    p = sub.add_parser("tca", help="life tracks over a lattice")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--context", required=True)
    p.add_argument("--entity-key", required=True,
                   help="object-cluster rule naming the tracked entity")
    p.add_argument("--granularity", default="day")
    p.add_argument("--sections")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_tca)

    p = sub.add_parser("esom", help="train a topographic map")
    p.add_argument("--context", required=True)
    p.add_argument("--rows", type=int, default=esom_mod.DEFAULT_ROWS)
    p.add_argument("--cols", type=int, default=esom_mod.DEFAULT_COLS)
    p.add_argument("--emergent", action="store_true",
                   help=f"use the emergent-scale grid "
                        f"({esom_mod.EMERGENT_ROWS}x{esom_mod.EMERGENT_COLS})")
    p.add_argument("--topology", choices=["toroid", "planar"],
                   default="toroid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--rate-start", type=float, default=0.5)
    p.add_argument("--rate-end", type=float, default=0.05)
    p.add_argument("--radius-start", type=float, default=None)
    p.add_argument("--radius-end", type=float, default=1.0)
    p.add_argument("--checkpoint", help="also write a weight checkpoint")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_esom)

    p = sub.add_parser("hmm", help="fit a process/event model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--ontology", required=True)
    p.add_argument("--entity-key", required=True)
    p.add_argument("--symbols", required=True,
                   help="comma-separated symbol vocabulary, in order")
    p.add_argument("--symbol-field", default="activity")
    p.add_argument("--symbol-groups",
                   help="JSON file mapping raw codes to symbols")
    p.add_argument("--unmapped", choices=["error", "skip"], default="error")
    p.add_argument("--mode", choices=["process", "em"], default="process")
    p.add_argument("--n-states", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--smoothing", type=float, default=0.0)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--sections")
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.add_argument("--graph", help="also write the graph JSON here")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_hmm)

    p = sub.add_parser("session", help="session store tools")
    sess_sub = p.add_subparsers(dest="subcommand", required=True)
    pc = sess_sub.add_parser("create")
    pc.add_argument("--corpus", required=True)
    pc.add_argument("--ontology", required=True)
    pc.add_argument("--id")
    pc.add_argument("--data-dir")
    pc.set_defaults(func=cmd_session_create)

    p = sub.add_parser("phase", help="run a design-loop phase")
    phase_sub = p.add_subparsers(dest="subcommand", required=True)
    pr = phase_sub.add_parser("run")
    pr.add_argument("--session", required=True)
    pr.add_argument("--profile", required=True, help="profile JSON file")
    pr.add_argument("--data-dir")
    pr.set_defaults(func=cmd_phase_run)

    p = sub.add_parser("export", help="fetch a session artifact")
    p.add_argument("--session", required=True)
    p.add_argument("--artifact", required=True)
    p.add_argument("--format", default="json",
                   choices=["json", "dot", "xml", "burmeister"])
    p.add_argument("--data-dir")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("report",
                       help="write CSV tables and figures for a session")
    p.add_argument("--session", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--top-terms", type=int, default=20)
    p.add_argument("--data-dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8137)
    p.add_argument("--data-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConceptBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
