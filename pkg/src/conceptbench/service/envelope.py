"""XML envelope for service I/O: <cordiet version="1"> wrapping a payload
plus metadata. Text payloads (JSON/DOT exports, document renderings) travel
as element text; XML payloads (corpus/ontology uploads) as child elements."""

from __future__ import annotations

import io
import xml.etree.ElementTree as ET

from ..errors import XmlSyntaxError

ENVELOPE_VERSION = "1"


def wrap_payload(payload: bytes, *, name: str, kind: str,
                 format: str) -> bytes:
    root = ET.Element("cordiet", version=ENVELOPE_VERSION)
    artifact = ET.SubElement(root, "artifact", name=name, kind=kind,
                             format=format)
    artifact.text = payload.decode("utf-8")
    buffer = io.BytesIO()
    ET.ElementTree(root).write(buffer, encoding="utf-8",
                               xml_declaration=True)
    return buffer.getvalue()


def parse_envelope(data: bytes) -> ET.Element:
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XmlSyntaxError(f"malformed envelope XML: {exc.msg}",
                             line=line, column=column) from exc
    if root.tag != "cordiet":
        raise XmlSyntaxError(f"expected <cordiet> envelope, got <{root.tag}>")
    return root


def unwrap_uploads(data: bytes) -> tuple[bytes, bytes]:
    """Extract the corpus and ontology XML from a session-creation envelope."""
    root = parse_envelope(data)
    corpus = root.find("corpus")
    ontology = root.find("ontology")
    if corpus is None or ontology is None:
        raise XmlSyntaxError(
            "session envelope needs <corpus> and <ontology> children")
    return ET.tostring(corpus, encoding="utf-8"), \
        ET.tostring(ontology, encoding="utf-8")
