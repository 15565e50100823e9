"""Content-addressed asset store for custom card photos and synthesized
voice-overs. Uploads are keyed by their digest, so re-uploading the same
bytes is a no-op and references stay valid across restarts."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

from ..errors import PayloadTooLarge

MAX_ASSET_BYTES = 10 * 1024 * 1024


class AssetStore:
    def __init__(self, root: Path, max_bytes: int = MAX_ASSET_BYTES):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.max_bytes = max_bytes

    def _blob_path(self, asset_id: str) -> Path:
        return self.root / asset_id

    def _meta_path(self, asset_id: str) -> Path:
        return self.root / f"{asset_id}.meta.json"

    def put(self, payload: bytes, mime: str) -> str:
        """Store by content digest; identical bytes yield the same id."""
        if len(payload) > self.max_bytes:
            raise PayloadTooLarge(
                f"asset is {len(payload)} bytes; the limit is {self.max_bytes}"
            )
        asset_id = hashlib.sha256(payload).hexdigest()[:32]
        self.register(asset_id, payload, mime)
        return asset_id

    def register(self, asset_id: str, payload: bytes, mime: str) -> None:
        """Store under a caller-chosen id (synthesized audio uses
        content-derived ids of its own). Existing ids are left alone."""
        if len(payload) > self.max_bytes:
            raise PayloadTooLarge(
                f"asset is {len(payload)} bytes; the limit is {self.max_bytes}"
            )
        blob = self._blob_path(asset_id)
        if blob.exists():
            return
        blob.write_bytes(payload)
        self._meta_path(asset_id).write_text(
            json.dumps({"mime": mime}, sort_keys=True) + "\n", encoding="utf-8"
        )

    def exists(self, asset_id: str) -> bool:
        return self._blob_path(asset_id).exists()

    def get(self, asset_id: str) -> Optional[tuple[bytes, str]]:
        blob = self._blob_path(asset_id)
        if not blob.exists():
            return None
        mime = "application/octet-stream"
        meta = self._meta_path(asset_id)
        if meta.exists():
            mime = json.loads(meta.read_text(encoding="utf-8")).get("mime", mime)
        return blob.read_bytes(), mime
