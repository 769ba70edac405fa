"""JSON/JSONL input with byte-offset diagnostics, and report writers."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterator


class InputError(ValueError):
    """Malformed input; the message names the source and byte offset."""


def _decode_error(source: str, offset: int, exc: json.JSONDecodeError, raw: bytes) -> InputError:
    # exc.pos counts characters of the decoded line; convert to bytes
    byte_pos = offset + len(raw.decode("utf-8", "replace")[: exc.pos].encode("utf-8"))
    return InputError(f"{source}: byte {byte_pos}: {exc.msg}")


def read_jsonl(stream, source: str = "<stdin>") -> Iterator[dict]:
    """Yield JSON objects from a binary or text stream, one per non-blank line."""
    offset = 0
    for raw in stream:
        if isinstance(raw, str):
            raw = raw.encode("utf-8")
        line = raw.strip()
        if line:
            try:
                yield json.loads(raw.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise InputError(f"{source}: byte {offset + exc.start}: invalid UTF-8") from exc
            except json.JSONDecodeError as exc:
                raise _decode_error(source, offset, exc, raw) from exc
        offset += len(raw)


def load_json(path: str):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise _decode_error(path, 0, exc, raw) from exc


def require(obj, key: str, source: str):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise InputError(f"{source}: missing field {key!r}") from None


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _clean(v.item())
    return v


def dumps(obj) -> str:
    return json.dumps(_clean(obj), separators=(",", ":"), allow_nan=False)


def to_csv(rows) -> str:
    """Flatten report rows to CSV; nested values are JSON-encoded."""
    rows = [_clean(r) for r in rows]
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (json.dumps(v, separators=(",", ":")) if isinstance(v, (dict, list)) else v)
                    for k, v in r.items()})
    return buf.getvalue()
