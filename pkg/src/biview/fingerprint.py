"""Canonical JSON hashing shared by every emitted artifact."""

from __future__ import annotations

import hashlib
import json


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def fingerprint_of(doc: dict) -> str:
    return hashlib.sha256(canonical_json(doc).encode()).hexdigest()


def content_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
