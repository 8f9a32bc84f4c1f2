"""The service's endpoint table: the one place paths are defined.

Other layers (CLI, UI, exports embedding document links) must build URLs
through these helpers so every emitted link resolves against the service.
"""

ENDPOINTS = {
    "create_session": ("POST", "/sessions"),
    "list_sessions": ("GET", "/sessions"),
    "session_info": ("GET", "/sessions/{session_id}"),
    "run_phase": ("POST", "/sessions/{session_id}/phases"),
    "get_artifact": ("GET", "/sessions/{session_id}/artifacts/{name}"),
    "get_document": ("GET", "/sessions/{session_id}/documents/{object_id}"),
}

#: environment variable naming the session data directory
DATA_DIR_ENV = "CONCEPTBENCH_DATA"


def document_url(session_id: str, object_id: str) -> str:
    return f"/sessions/{session_id}/documents/{object_id}"


def artifact_url(session_id: str, name: str) -> str:
    return f"/sessions/{session_id}/artifacts/{name}"
