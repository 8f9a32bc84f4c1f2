"""Single-file embedded store: one JSON document per session.

Keeps the uploaded XML verbatim (corpus and ontology re-parse
deterministically on load), the eagerly built index, every artifact's bytes,
and the audit log of phase runs.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from ..errors import ArtifactNotFoundError

STORE_FORMAT_VERSION = 1


class SessionStore:
    def __init__(self, data_dir: str | os.PathLike):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise ArtifactNotFoundError(f"bad session id: {session_id!r}")
        return self.data_dir / f"{session_id}.json"

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).is_file()

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.json"))

    def load(self, session_id: str) -> dict:
        path = self._path(session_id)
        if not path.is_file():
            raise ArtifactNotFoundError(f"unknown session: {session_id}")
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def save(self, session_id: str, record: dict) -> None:
        record["version"] = STORE_FORMAT_VERSION
        path = self._path(session_id)
        fd, tmp = tempfile.mkstemp(dir=self.data_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record, fh, ensure_ascii=False, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def delete(self, session_id: str) -> None:
        path = self._path(session_id)
        if path.is_file():
            path.unlink()
