"""Session lifecycle and the four-phase design loop.

Every phase run is a pure function of (session inputs, profile), so a run is
reproducible from its audit entry; `replay` recomputes an artifact without
touching the store and must return byte-identical payloads.
"""

from __future__ import annotations

import json
import threading
import uuid
from datetime import datetime, timezone

from .. import esom as esom_mod
from .. import fca as fca_mod
from .. import hmm as hmm_mod
from .. import tca as tca_mod
from ..context import (
    FormalContext,
    build_context,
    context_from_json,
    context_to_burmeister,
    context_to_json,
)
from ..corpus.index import InvertedIndex, build_index, index_from_json, index_to_json
from ..corpus.model import CANONICAL_SECTIONS, Corpus, load_documents
from ..errors import (
    ArtifactNotFoundError,
    ConfigurationError,
    PhaseOrderingError,
    UnknownNameError,
)
from ..ontology import (
    Ontology,
    apply_object_cluster,
    apply_segmentation,
    composites_as_corpus,
    parse_ontology,
)
from .endpoints import document_url
from .envelope import wrap_payload
from .profiles import Profile
from .store import SessionStore


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


class LoadedSession:
    """Parsed view of one stored session record."""

    def __init__(self, session_id: str, record: dict):
        self.id = session_id
        self.record = record
        self.corpus: Corpus = load_documents(
            record["corpus_xml"].encode("utf-8"))
        self.ontology: Ontology = parse_ontology(
            record["ontology_xml"].encode("utf-8"))
        self.index: InvertedIndex = index_from_json(
            record["index"].encode("utf-8"))

    @property
    def artifacts(self) -> dict:
        return self.record["artifacts"]

    @property
    def composites(self) -> dict:
        return self.record["composites"]

    @property
    def audit(self) -> list:
        return self.record["audit"]

    def info(self) -> dict:
        return {
            "id": self.id,
            "created": self.record["created"],
            "language": self.corpus.language,
            "documents": len(self.corpus),
            "artifacts": {
                name: {"kind": entry["kind"], "created": entry["created"]}
                for name, entry in sorted(self.artifacts.items())
            },
            "audit": self.audit,
        }


class SessionManager:
    """Owner of all sessions under one data directory.

    Phase runs are serialized per session; reads are lock-free on the
    immutable stored payloads.
    """

    def __init__(self, data_dir):
        self.store = SessionStore(data_dir)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    # -- lifecycle ---------------------------------------------------------

    def create_session(self, corpus_xml: bytes, ontology_xml: bytes,
                       session_id: str | None = None) -> LoadedSession:
        corpus = load_documents(corpus_xml)
        parse_ontology(ontology_xml)  # validate before persisting anything
        index = build_index(corpus, set(CANONICAL_SECTIONS))
        session_id = session_id or uuid.uuid4().hex[:12]
        if self.store.exists(session_id):
            raise ConfigurationError(f"session {session_id!r} already exists")
        record = {
            "id": session_id,
            "created": _now(),
            "corpus_xml": corpus_xml.decode("utf-8"),
            "ontology_xml": ontology_xml.decode("utf-8"),
            "index": index_to_json(index).decode("utf-8"),
            "artifacts": {},
            "composites": {},
            "audit": [],
        }
        self.store.save(session_id, record)
        return LoadedSession(session_id, record)

    def get_session(self, session_id: str) -> LoadedSession:
        return LoadedSession(session_id, self.store.load(session_id))

    def list_sessions(self) -> list[str]:
        return self.store.list_sessions()

    # -- phases ------------------------------------------------------------

    def run_phase(self, session_id: str, profile: Profile) -> dict:
        with self._lock(session_id):
            session = self.get_session(session_id)
            started = _now()
            name, kind, payload, extras = self._execute(session, profile)
            if name in session.artifacts:
                raise ConfigurationError(
                    f"artifact {name!r} already exists; artifact names are "
                    "unique per session")
            session.artifacts[name] = {
                "kind": kind,
                "payload": payload.decode("utf-8"),
                "profile_hash": profile.hash,
                "profile": profile.to_dict(),
                "inputs": extras.get("inputs", []),
                "created": started,
            }
            if "dot" in extras:
                session.artifacts[name]["payload_dot"] = \
                    extras["dot"].decode("utf-8")
            session.composites.update(extras.get("composites", {}))
            session.audit.append({
                "phase": profile.phase,
                "profile": profile.to_dict(),
                "profile_hash": profile.hash,
                "inputs": extras.get("inputs", []),
                "outputs": [name],
                "started": started,
                "finished": _now(),
            })
            self.store.save(session_id, session.record)
            return {"artifact": name, "kind": kind}

    def replay(self, session_id: str, artifact_name: str) -> bytes:
        """Recompute an artifact from its recorded profile, without writing."""
        session = self.get_session(session_id)
        entry = session.artifacts.get(artifact_name)
        if entry is None:
            raise ArtifactNotFoundError(
                f"unknown artifact: {artifact_name}")
        profile = Profile.from_dict(entry["profile"])
        _, _, payload, _ = self._execute(session, profile)
        return payload

    def _execute(self, session: LoadedSession,
                 profile: Profile) -> tuple[str, str, bytes, dict]:
        phase = profile.phase
        if phase == "start_investigation":
            return self._run_start(session, profile)
        if phase == "compose_artifact":
            return self._run_compose(session, profile)
        if phase == "analyze_artifact":
            return self._run_analyze(session, profile)
        return self._run_deploy(session, profile)

    # -- phase 1: context construction --------------------------------------

    def _run_start(self, session: LoadedSession,
                   profile: Profile) -> tuple[str, str, bytes, dict]:
        params = profile.parameters
        ontology = session.ontology
        attrs = [ontology.attribute(name) for name in params["attributes"]]
        corpus = session.corpus
        index = session.index
        inputs = ["corpus", "ontology"]
        composites: dict[str, dict] = {}

        selection = params.get("objects")
        if selection:
            docs = tuple(corpus.get(doc_id) for doc_id in selection)
            corpus = Corpus(documents=docs, language=corpus.language,
                            provenance=corpus.provenance)

        seg = params.get("segmentation")
        if seg:
            rule = ontology.segmentation_rules.get(seg["rule"])
            if rule is None:
                raise UnknownNameError(
                    f"unknown segmentation rule: {seg['rule']}")
            segments = dict(apply_segmentation(corpus, rule, index))
            if seg["segment"] not in segments:
                raise UnknownNameError(
                    f"unknown segment {seg['segment']!r}; have "
                    f"{sorted(segments)}")
            corpus = segments[seg["segment"]]

        cluster_name = params.get("object_cluster")
        if cluster_name:
            rule = ontology.object_cluster_rules.get(cluster_name)
            if rule is None:
                raise UnknownNameError(
                    f"unknown object-cluster rule: {cluster_name}")
            comps = apply_object_cluster(corpus, rule)
            corpus = composites_as_corpus(comps, corpus.language,
                                          corpus.provenance)
            index = build_index(corpus, set(CANONICAL_SECTIONS))
            composites = {
                comp.id: {"members": list(comp.member_ids),
                          "rule": rule.name}
                for comp in comps
            }

        urls = {doc.id: document_url(session.id, doc.id) for doc in corpus}
        ctx = build_context(corpus, attrs, index, urls=urls)
        payload = context_to_json(ctx)
        name = params.get("artifact", f"{profile.name}-context")
        return name, "context", payload, {"inputs": inputs,
                                          "composites": composites}

    # -- phase 2: artifact composition --------------------------------------

    def _load_context_artifact(self, session: LoadedSession,
                               name: str) -> FormalContext:
        entry = session.artifacts.get(name)
        if entry is None:
            raise PhaseOrderingError(
                f"missing context artifact {name!r}; run a "
                "start_investigation phase first")
        if entry["kind"] != "context":
            raise ConfigurationError(
                f"artifact {name!r} is a {entry['kind']}, not a context")
        return context_from_json(entry["payload"].encode("utf-8"))

    def _context_corpus(self, session: LoadedSession,
                        ctx: FormalContext) -> Corpus:
        """Documents of the session corpus that are objects of the context."""
        docs = []
        for obj in ctx.objects:
            if obj.id in session.corpus:
                docs.append(session.corpus.get(obj.id))
            else:
                raise ConfigurationError(
                    f"context object {obj.id!r} is not a session document; "
                    "this artifact kind needs a document-level context")
        return Corpus(documents=tuple(docs),
                      language=session.corpus.language,
                      provenance=session.corpus.provenance)

    def _run_compose(self, session: LoadedSession,
                     profile: Profile) -> tuple[str, str, bytes, dict]:
        params = profile.parameters
        kind = params["kind"]
        ctx_name = params["context"]
        ctx = self._load_context_artifact(session, ctx_name)
        inputs = [ctx_name]
        name = params.get("artifact", f"{profile.name}-{kind}")

        if kind == "fca":
            max_concepts = params.get("max_concepts",
                                      fca_mod.DEFAULT_MAX_CONCEPTS)
            concepts = fca_mod.compute_concepts(ctx, max_concepts)
            lattice = fca_mod.build_lattice(ctx, concepts)
            return name, "lattice", fca_mod.export_lattice(lattice, "json"), \
                {"inputs": inputs,
                 "dot": fca_mod.export_lattice(lattice, "dot")}

        if kind == "tca":
            ontology = session.ontology
            rule = ontology.object_cluster_rules.get(params["entity_key"])
            if rule is None:
                raise UnknownNameError(
                    f"unknown object-cluster rule: {params['entity_key']}")
            corpus = self._context_corpus(session, ctx)
            systems = tca_mod.build_time_system(corpus, rule,
                                                params["granularity"])
            concepts = fca_mod.compute_concepts(ctx)
            lattice = fca_mod.build_lattice(ctx, concepts)
            tracks = tca_mod.compute_life_tracks(systems, lattice, ctx)
            return name, "tracks", tca_mod.export_tracks(lattice, tracks), \
                {"inputs": inputs}

        if kind == "esom":
            features = params.get("features", "binary")
            if features == "binary":
                vectors = esom_mod.vectors_from_context(ctx)
            elif features == "tf":
                corpus = self._context_corpus(session, ctx)
                attrs = [session.ontology.attribute(a)
                         for a in ctx.attributes]
                vectors = esom_mod.tf_vectors(corpus, attrs, session.index)
            else:
                raise ConfigurationError(
                    f"unknown feature scheme: {features!r}")
            rows = params.get("rows", esom_mod.DEFAULT_ROWS)
            cols = params.get("cols", esom_mod.DEFAULT_COLS)
            if params.get("emergent"):
                rows, cols = esom_mod.EMERGENT_ROWS, esom_mod.EMERGENT_COLS
            grid = esom_mod.init_grid(rows, cols,
                                      params.get("topology", "toroid"),
                                      dim=len(ctx.attributes),
                                      seed=params["seed"])
            schedule = esom_mod.TrainingSchedule(
                epochs=params["epochs"],
                rate_start=params.get("rate_start", 0.5),
                rate_end=params.get("rate_end", 0.05),
                radius_start=params.get("radius_start"),
                radius_end=params.get("radius_end", 1.0))
            trained = esom_mod.train(grid, vectors, schedule)
            urls = {obj.id: obj.url for obj in ctx.objects}
            payload = esom_mod.export_map(trained, vectors, urls,
                                          schedule.validate(rows, cols))
            return name, "esom", payload, {"inputs": inputs}

        # kind == "hmm"
        ontology = session.ontology
        rule = ontology.object_cluster_rules.get(params["entity_key"])
        if rule is None:
            raise UnknownNameError(
                f"unknown object-cluster rule: {params['entity_key']}")
        corpus = self._context_corpus(session, ctx)
        symbol_map = hmm_mod.SymbolMap(
            symbols=tuple(params["symbols"]),
            source_field=params.get("symbol_field", "activity"),
            groups=params.get("symbol_groups"),
            unmapped=params.get("unmapped", "error"))
        sequences = hmm_mod.sequences_from_corpus(corpus, rule, symbol_map,
                                                  session.index)
        mode = params.get("mode", "process")
        trace = None
        if mode == "process":
            model = hmm_mod.fit_process_model(
                sequences, len(symbol_map.symbols),
                smoothing=params.get("smoothing", 0.0),
                symbol_names=symbol_map.symbols)
        else:
            model, trace = hmm_mod.baum_welch(
                sequences, params["n_states"], len(symbol_map.symbols),
                init=params.get("init", "seeded-random"),
                seed=params["seed"],
                tol=params.get("tol", 1e-6),
                max_iter=params.get("max_iter", 200))
            model = hmm_mod.HmmModel(
                transition=model.transition, emission=model.emission,
                initial=model.initial, symbol_names=symbol_map.symbols,
                seed=model.seed)
        threshold = params.get("threshold", 0.0)
        combined = {
            "version": hmm_mod.MODEL_FORMAT_VERSION,
            "kind": "hmm",
            "model": json.loads(hmm_mod.model_to_json(model, trace)),
            "graph": hmm_mod.graph_to_dict(model, threshold),
        }
        payload = (json.dumps(combined, ensure_ascii=False, sort_keys=True,
                              separators=(",", ":")) + "\n").encode("utf-8")
        return name, "hmm", payload, \
            {"inputs": inputs,
             "dot": hmm_mod.export_hmm_graph(model, threshold, "dot")}

    # -- phase 3: analysis report --------------------------------------------

    def _run_analyze(self, session: LoadedSession,
                     profile: Profile) -> tuple[str, str, bytes, dict]:
        from ..report import summarize_artifact

        params = profile.parameters
        produced = {n: e for n, e in session.artifacts.items()
                    if e["kind"] != "report"}
        if not produced:
            raise PhaseOrderingError(
                "analyze_artifact needs at least one composed artifact; "
                "run compose_artifact first")
        top_n = params.get("top_terms", 20)
        frequencies = session.index.term_frequencies()
        ranked = sorted(frequencies.items(), key=lambda kv: (-kv[1], kv[0]))
        summaries = {}
        for name, entry in sorted(produced.items()):
            summaries[name] = summarize_artifact(entry)
        report = {
            "version": 1,
            "kind": "report",
            "term_frequencies": [
                {"term": term, "count": count}
                for term, count in ranked[:top_n]
            ],
            "artifacts": summaries,
        }
        payload = (json.dumps(report, ensure_ascii=False, sort_keys=True,
                              separators=(",", ":")) + "\n").encode("utf-8")
        name = params.get("artifact", f"{profile.name}-report")
        return name, "report", payload, {"inputs": sorted(produced)}

    # -- phase 4: deployment bundle -------------------------------------------

    def _run_deploy(self, session: LoadedSession,
                    profile: Profile) -> tuple[str, str, bytes, dict]:
        params = profile.parameters
        bundle = {"version": 1, "kind": "bundle",
                  "annotations": params.get("annotations", {}),
                  "artifacts": {}}
        for name in params["artifacts"]:
            entry = session.artifacts.get(name)
            if entry is None:
                raise PhaseOrderingError(
                    f"deploy_knowledge references missing artifact {name!r}")
            bundle["artifacts"][name] = {
                "kind": entry["kind"],
                "payload": json.loads(entry["payload"])
                if entry["kind"] != "dot" else entry["payload"],
            }
        payload = (json.dumps(bundle, ensure_ascii=False, sort_keys=True,
                              separators=(",", ":")) + "\n").encode("utf-8")
        name = params.get("artifact", f"{profile.name}-bundle")
        return name, "bundle", payload, {"inputs": list(params["artifacts"])}

    # -- artifact and document access -----------------------------------------

    def get_artifact(self, session_id: str, name: str,
                     format: str = "json") -> tuple[bytes, str]:
        """Artifact bytes plus a content type, in the requested format."""
        session = self.get_session(session_id)
        entry = session.artifacts.get(name)
        if entry is None:
            raise ArtifactNotFoundError(f"unknown artifact: {name}")
        payload = entry["payload"].encode("utf-8")
        if format == "json":
            return payload, "application/json"
        if format == "xml":
            return wrap_payload(payload, name=name, kind=entry["kind"],
                                format="json"), "application/xml"
        if format == "dot":
            return self._as_dot(entry), "text/vnd.graphviz"
        if format == "burmeister" and entry["kind"] == "context":
            ctx = context_from_json(payload)
            return context_to_burmeister(ctx), "text/plain"
        raise ConfigurationError(
            f"unknown format {format!r} for artifact kind {entry['kind']!r}")

    def _as_dot(self, entry: dict) -> bytes:
        if "payload_dot" not in entry:
            raise ConfigurationError(
                f"artifact kind {entry['kind']!r} has no dot form")
        return entry["payload_dot"].encode("utf-8")

    def get_document(self, session_id: str, object_id: str) -> dict:
        """Document rendering: the target of every label URL in exports."""
        session = self.get_session(session_id)
        if object_id in session.composites:
            comp = session.composites[object_id]
            return {
                "id": object_id,
                "kind": "composite",
                "rule": comp["rule"],
                "members": [
                    {"id": member,
                     "url": document_url(session_id, member)}
                    for member in comp["members"]
                ],
            }
        if object_id not in session.corpus:
            raise ArtifactNotFoundError(f"unknown document: {object_id}")
        doc = session.corpus.get(object_id)
        return {
            "id": doc.id,
            "kind": "document",
            "sections": dict(doc.sections),
            "timestamp": doc.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ")
            if doc.timestamp else None,
            "structured_fields": dict(doc.structured_fields),
            "source_url": doc.source_url,
        }

    # -- link integrity ---------------------------------------------------------

    def sweep_links(self, session_id: str) -> list[str]:
        """Resolve every URL in every artifact via get_document; returns the
        failures (empty list = clean)."""
        session = self.get_session(session_id)
        failures = []
        for name, entry in session.artifacts.items():
            for url in _iter_urls(json.loads(entry["payload"])):
                prefix = f"/sessions/{session_id}/documents/"
                if not url.startswith(prefix):
                    failures.append(f"{name}: foreign url {url}")
                    continue
                object_id = url[len(prefix):]
                try:
                    self.get_document(session_id, object_id)
                except ArtifactNotFoundError:
                    failures.append(f"{name}: dead link {url}")
        return failures


def _iter_urls(payload) -> list[str]:
    urls: list[str] = []

    def walk(node):
        if isinstance(node, dict):
            for key, value in node.items():
                if key in ("url", "urls"):
                    if isinstance(value, str) and value:
                        urls.append(value)
                    elif isinstance(value, dict):
                        urls.extend(v for v in value.values() if v)
                else:
                    walk(value)
        elif isinstance(node, list):
            for item in node:
                walk(item)

    walk(payload)
    return urls
