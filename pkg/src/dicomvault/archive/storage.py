"""Blob persistence: one file per instance, path derived from the DIM UIDs.

UIDs are dotted-numeric by the time they reach this layer (validated during
key extraction), so they are safe as path components. Files land via a
temp-file rename so readers never observe partial writes.
"""

from __future__ import annotations

import os
from pathlib import Path

from .errors import StorageFailure


class BlobStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def uri_for(self, study_uid: str, series_uid: str, sop_uid: str) -> str:
        return f"{study_uid}/{series_uid}/{sop_uid}.dcm"

    def path_of(self, uri: str) -> Path:
        path = (self.root / uri).resolve()
        if not path.is_relative_to(self.root.resolve()):
            raise StorageFailure(f"storage uri escapes the root: {uri}")
        return path

    def write(self, uri: str, data: bytes) -> None:
        path = self.path_of(uri)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".part")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"writing {uri}: {exc}") from exc

    def read(self, uri: str) -> bytes:
        path = self.path_of(uri)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageFailure(f"reading {uri}: {exc}") from exc

    def delete(self, uri: str) -> None:
        path = self.path_of(uri)
        try:
            path.unlink(missing_ok=True)
        except OSError as exc:
            raise StorageFailure(f"deleting {uri}: {exc}") from exc

    def scan(self) -> list[str]:
        """All stored blob URIs, deterministic order."""
        out = []
        for path in sorted(self.root.rglob("*.dcm")):
            out.append(str(path.relative_to(self.root)))
        return out

    def wipe(self) -> None:
        for uri in self.scan():
            self.delete(uri)
