"""Append-only JSONL cache for generations and embeddings.

Layout under the cache directory:

    gen/responses.jsonl    one record per generation fingerprint
    emb/embeddings.jsonl   one record per (model, text hash)

Files are append-only, so a crash can at worst duplicate a record (last
write wins on load) and runs remain diffable.  An in-memory index is built
at startup; appends are serialised with a lock so concurrent generation
workers can share one cache.
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class CachedResponse:
    fingerprint: str
    raw: str
    cleaned: str
    empty: bool
    timestamp: float


def _encode_vector(vec: np.ndarray) -> dict:
    vec = np.asarray(vec, dtype=np.float64)
    return {"dim": int(vec.size), "b64": base64.b64encode(vec.tobytes()).decode("ascii")}


def _decode_vector(payload: dict) -> np.ndarray:
    vec = np.frombuffer(base64.b64decode(payload["b64"]), dtype=np.float64)
    return vec.reshape(int(payload["dim"])).copy()


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ResponseCache:
    def __init__(self, root):
        self.root = Path(root)
        self._gen_path = self.root / "gen" / "responses.jsonl"
        self._emb_path = self.root / "emb" / "embeddings.jsonl"
        self._gen_path.parent.mkdir(parents=True, exist_ok=True)
        self._emb_path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._generations: dict[str, CachedResponse] = {}
        self._embeddings: dict[tuple[str, str], np.ndarray] = {}
        self._load()

    def _load(self) -> None:
        for path in self._gen_path.parent.glob("*.jsonl"):
            with path.open(encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._generations[rec["fingerprint"]] = CachedResponse(
                        fingerprint=rec["fingerprint"],
                        raw=rec["raw"],
                        cleaned=rec.get("cleaned", ""),
                        empty=rec.get("empty", False),
                        timestamp=rec.get("timestamp", 0.0),
                    )
        for path in self._emb_path.parent.glob("*.jsonl"):
            with path.open(encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    rec = json.loads(line)
                    self._embeddings[(rec["model"], rec["text_key"])] = _decode_vector(rec)

    # -- generations --------------------------------------------------------

    def get_generation(self, fingerprint: str) -> CachedResponse | None:
        return self._generations.get(fingerprint)

    def put_generation(self, fingerprint: str, raw: str, cleaned: str = "") -> CachedResponse:
        entry = CachedResponse(
            fingerprint=fingerprint,
            raw=raw,
            cleaned=cleaned,
            empty=not cleaned.strip() if cleaned else not raw.strip(),
            timestamp=time.time(),
        )
        record = {
            "fingerprint": entry.fingerprint,
            "raw": entry.raw,
            "cleaned": entry.cleaned,
            "empty": entry.empty,
            "timestamp": entry.timestamp,
        }
        with self._lock:
            self._generations[fingerprint] = entry
            with self._gen_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
        return entry

    # -- embeddings ---------------------------------------------------------

    def get_embedding(self, model: str, text: str) -> np.ndarray | None:
        hit = self._embeddings.get((model, text_key(text)))
        return None if hit is None else hit.copy()

    def put_embedding(self, model: str, text: str, vector: np.ndarray) -> None:
        key = (model, text_key(text))
        record = {"model": model, "text_key": key[1], **_encode_vector(vector)}
        with self._lock:
            self._embeddings[key] = np.asarray(vector, dtype=np.float64).copy()
            with self._emb_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._generations) + len(self._embeddings)
