"""Deterministic output helpers shared by the CLI and scripts."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence


def fmt17(x) -> str:
    """Float formatting for regression-stable CSV: 17 significant digits,
    '.' decimal, nan/inf spelled out."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def config_hash(config: dict) -> str:
    """sha256 over the canonical JSON of the math-relevant config fields."""
    payload = {k: v for k, v in config.items() if k not in ("out",)}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path: Path, comments: Sequence[str], header: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    """CSV with leading '#' comment lines; LF newlines; fmt17 floats."""
    with open(path, "w", newline="\n") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt17(x) for x in row) + "\n")


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def parse_grid(text: str) -> list[float]:
    """Grid spec: 'a,b,c' explicit list, or 'start:stop:count' (linear), or
    'start:stop:countgeom' with a trailing 'g' for geometric spacing."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec needs start:stop:count, got {text!r}")
        geometric = parts[2].endswith("g")
        count = int(parts[2].rstrip("g"))
        start, stop = float(parts[0]), float(parts[1])
        if count < 1:
            raise ValueError("grid count must be >= 1")
        if count == 1:
            return [start]
        if geometric:
            if start <= 0 or stop <= 0:
                raise ValueError("geometric grid needs positive endpoints")
            ratio = (stop / start) ** (1.0 / (count - 1))
            return [start * ratio**i for i in range(count)]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]
