"""Shared file plumbing: atomic writes, digests, provenance headers, CSV helpers."""
from __future__ import annotations

import csv
import hashlib
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__

PROVENANCE_PREFIX = "# drivescore"


def sha256_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance_line(seed: int | None = None, inputs: dict[str, str] | None = None) -> str:
    """One-line artifact provenance: tool version, seed, input digests."""
    parts = [f"{PROVENANCE_PREFIX} {__version__}"]
    if seed is not None:
        parts.append(f"seed={seed}")
    for name, digest in (inputs or {}).items():
        parts.append(f"{name}=sha256:{digest[:16]}")
    return " | ".join(parts)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via temp file + rename so readers never observe a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal form; integers stay compact."""
    x = float(x)  # numpy scalars repr as np.float64(...), plain floats don't
    if x != x:  # NaN -> empty cell
        return ""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[object]],
               provenance: str | None = None) -> str:
    buf = io.StringIO()
    if provenance:
        buf.write(provenance + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def read_csv_rows(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV, skipping leading provenance/comment lines. Returns (header, dict rows)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        return [], []
    return list(reader.fieldnames), list(reader)
