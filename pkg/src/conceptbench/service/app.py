"""HTTP access layer: the endpoint table bound to a SessionManager.

Uploads and artifact fetches speak XML envelopes or plain JSON; analytic
payloads themselves are the module-native JSON/DOT exports.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..errors import (
    ArtifactNotFoundError,
    ConceptBenchError,
    PhaseOrderingError,
    ResourceLimitError,
)
from .endpoints import DATA_DIR_ENV
from .envelope import unwrap_uploads
from .manager import SessionManager
from .profiles import Profile

_STATUS = (
    (ArtifactNotFoundError, 404),
    (PhaseOrderingError, 409),
    (ResourceLimitError, 413),
    (ConceptBenchError, 400),
)


def create_app(data_dir: str | None = None) -> FastAPI:
    data_dir = data_dir or os.environ.get(DATA_DIR_ENV, "./conceptbench-data")
    manager = SessionManager(data_dir)
    app = FastAPI(title="conceptbench", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.manager = manager

    @app.exception_handler(ConceptBenchError)
    async def _error_handler(request: Request, exc: ConceptBenchError):
        status = next(code for cls, code in _STATUS if isinstance(exc, cls))
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.post("/sessions")
    async def create_session(request: Request):
        content_type = request.headers.get("content-type", "")
        body = await request.body()
        if "xml" in content_type:
            corpus_xml, ontology_xml = unwrap_uploads(body)
            session_id = None
        else:
            import json as _json
            payload = _json.loads(body)
            corpus_xml = payload["corpus"].encode("utf-8")
            ontology_xml = payload["ontology"].encode("utf-8")
            session_id = payload.get("session_id")
        session = manager.create_session(corpus_xml, ontology_xml,
                                         session_id=session_id)
        return session.info()

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": manager.list_sessions()}

    @app.get("/sessions/{session_id}")
    def session_info(session_id: str):
        return manager.get_session(session_id).info()

    @app.post("/sessions/{session_id}/phases")
    async def run_phase(session_id: str, request: Request):
        import json as _json
        profile = Profile.from_dict(_json.loads(await request.body()))
        return manager.run_phase(session_id, profile)

    @app.get("/sessions/{session_id}/artifacts/{name}")
    def get_artifact(session_id: str, name: str,
                     format: str = Query(default="json")):
        payload, content_type = manager.get_artifact(session_id, name, format)
        return Response(content=payload, media_type=content_type)

    @app.get("/sessions/{session_id}/documents/{object_id}")
    def get_document(session_id: str, object_id: str,
                     format: str = Query(default="json")):
        rendering = manager.get_document(session_id, object_id)
        if format == "xml":
            import io
            import xml.etree.ElementTree as ET
            root = ET.Element("cordiet", version="1")
            doc = ET.SubElement(root, "document", id=rendering["id"],
                                kind=rendering["kind"])
            if rendering["kind"] == "composite":
                for member in rendering["members"]:
                    ET.SubElement(doc, "member", id=member["id"],
                                  url=member["url"])
            else:
                for section, text in rendering["sections"].items():
                    if text:
                        ET.SubElement(doc, section).text = text
                for key, value in rendering["structured_fields"].items():
                    field = ET.SubElement(doc, "field", name=key)
                    field.text = value
            buffer = io.BytesIO()
            ET.ElementTree(root).write(buffer, encoding="utf-8",
                                       xml_declaration=True)
            return Response(content=buffer.getvalue(),
                            media_type="application/xml")
        return rendering

    return app
