"""Atomic file output and run metadata."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

__all__ = ["atomic_write", "csv_text", "content_hash", "write_output", "fmt"]


def fmt(value) -> str:
    """Locale-free, round-trippable cell formatting."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(float(value))  # plain repr even for numpy float64
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to a temporary sibling file, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def content_hash(obj) -> str:
    """Git blob hash of the canonical JSON encoding of ``obj``."""
    data = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def write_output(out_dir, name: str, text: str, command: str, config: dict,
                 extra: dict | None = None) -> Path:
    """Write ``name`` and its ``<stem>.meta.json`` companion."""
    out_dir = Path(out_dir)
    path = atomic_write(out_dir / name, text)
    meta = {
        "command": command,
        "file": name,
        "config": config,
        "config_hash": content_hash(config),
        "seed": config.get("sim.seed"),
        "version": __version__,
    }
    if extra:
        meta["details"] = extra
    atomic_write(out_dir / f"{Path(name).stem}.meta.json",
                 json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return str(obj)
