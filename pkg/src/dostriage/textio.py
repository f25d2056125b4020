"""Plain-text formats shared by the CLI: flat key-value files, matrix blocks and CSV tables."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import InputError


def fmt(v) -> str:
    """Shortest text that round-trips a float64 (at most 17 significant digits)."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_kv(path) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_kv(path, items: Mapping[str, object]) -> None:
    lines = [f"{k} = {v}" for k, v in items.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_matrix_blocks(path, blocks: Iterable[tuple[str, np.ndarray]]) -> None:
    """Write named arrays as ``name rows cols`` headers followed by row-major values."""
    lines = []
    for name, arr in blocks:
        a = np.atleast_2d(np.asarray(arr, dtype=np.float64))
        lines.append(f"{name} {a.shape[0]} {a.shape[1]}")
        lines.extend(" ".join(f"{v:.17g}" for v in row) for row in a)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix_blocks(path) -> list[tuple[str, np.ndarray]]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    blocks = []
    i = 0
    try:
        while i < len(lines):
            name, r, c = lines[i].split()
            r, c = int(r), int(c)
            rows = [[float(v) for v in lines[i + 1 + k].split()] for k in range(r)]
            blocks.append((name, np.array(rows, dtype=np.float64).reshape(r, c)))
            i += 1 + r
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed matrix block near line {i + 1}") from exc
    return blocks


def write_csv(path, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def read_csv_rows(path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
