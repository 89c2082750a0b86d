"""Canonical JSON helpers.

Serialized artifacts must be byte-reproducible so that pipeline manifests can
be compared across runs. Everything funnels through `dumps_canonical`, which
fixes key order and separators; floats use Python's shortest round-trip repr.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ParseError


def dumps_canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def dumps_ordered(obj: Any) -> str:
    """Like dumps_canonical but preserves dict insertion order.

    Used for wire formats whose documented field order we keep for
    readability; still byte-deterministic.
    """
    return json.dumps(obj, sort_keys=False, separators=(",", ":"), allow_nan=False)


def dump_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(obj) + "\n", encoding="utf-8")


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno) from exc


def write_jsonl(rows: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(dumps_canonical(row))
            fh.write("\n")


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, parsed_object); line numbers start at 1."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc.msg), line=lineno) from exc


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_obj(obj: Any) -> str:
    return hashlib.sha256(dumps_canonical(obj).encode("utf-8")).hexdigest()
