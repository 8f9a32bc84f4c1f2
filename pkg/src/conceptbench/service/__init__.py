"""Design-loop orchestration: sessions, profiles, phases, HTTP access."""

from .endpoints import ENDPOINTS, artifact_url, document_url
from .manager import LoadedSession, SessionManager
from .profiles import ARTIFACT_KINDS, PHASES, Profile

__all__ = [
    "ARTIFACT_KINDS",
    "ENDPOINTS",
    "LoadedSession",
    "PHASES",
    "Profile",
    "SessionManager",
    "artifact_url",
    "document_url",
]
