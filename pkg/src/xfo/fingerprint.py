"""Stable content fingerprints.

A fingerprint is the first 64 bits of a SHA-256 digest over a canonical
JSON encoding (sorted keys, tight separators, ASCII only), so equal
definitions hash equally across runs and platforms regardless of
PYTHONHASHSEED.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def stable_fingerprint(payload: Any) -> str:
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
    return digest[:16]
