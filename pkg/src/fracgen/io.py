"""Plain-text file formats: solution catalogs, walk transcripts, row sidecars, exponent lists."""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .design import DesignError, DesignSpec, Exponent


def format_solutions(X: np.ndarray) -> str:
    """``count cols`` header, then one space-separated row per solution."""
    X = np.asarray(X, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("expected a 2-d array of solutions")
    lines = [f"{X.shape[0]} {X.shape[1]}"]
    lines += [" ".join(str(int(v)) for v in row) for row in X]
    return "\n".join(lines) + "\n"


def parse_solutions(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty solution file")
    try:
        count, cols = (int(v) for v in lines[0].split())
        body = [[int(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed solution file: {exc}") from None
    if len(body) != count or any(len(row) != cols for row in body):
        raise ValueError(f"solution file declares {count} x {cols} but body does not match")
    return np.array(body, dtype=np.int64).reshape(count, cols)


def content_digest(text: str) -> str:
    """SHA-256 over the canonical bytes, ignoring ``#`` comment lines."""
    body = "".join(ln + "\n" for ln in text.splitlines() if not ln.startswith("#"))
    return hashlib.sha256(body.encode()).hexdigest()


def write_solutions(X: np.ndarray, path: str | Path) -> str:
    """Write a catalog and return its digest."""
    text = format_solutions(X)
    Path(path).write_text(text)
    return content_digest(text)


def read_solutions(path: str | Path) -> np.ndarray:
    return parse_solutions(Path(path).read_text())


def format_transcript(meta: dict[str, object], X: np.ndarray) -> str:
    """``# key: value`` header lines followed by a solution block."""
    head = "".join(f"# {k}: {v}\n" for k, v in meta.items())
    return head + format_solutions(X)


def parse_transcript(text: str) -> tuple[dict[str, str], np.ndarray]:
    meta = {}
    for ln in text.splitlines():
        if ln.startswith("# ") and ":" in ln:
            key, _, val = ln[2:].partition(":")
            meta[key.strip()] = val.strip()
    return meta, parse_solutions(text)


def write_rows(rows: Iterable[object], path: str | Path) -> None:
    Path(path).write_text("".join(f"{r}\n" for r in rows))


def read_rows(path: str | Path) -> list[str]:
    return [ln for ln in Path(path).read_text().splitlines() if ln]


def parse_exponent(token: str, spec: DesignSpec | None = None) -> Exponent:
    """``"1,0,2"``, ``"1 0 2"`` or the compact digit string ``"102"``."""
    token = token.strip()
    if "," in token or " " in token:
        vals = tuple(int(v) for v in token.replace(",", " ").split())
    else:
        vals = tuple(int(c) for c in token)
    if spec is not None:
        vals = spec.check(vals)
    return vals


def parse_exponents(text: str, spec: DesignSpec) -> list[Exponent]:
    out = []
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if ln:
            out.append(parse_exponent(ln, spec))
    if not out:
        raise DesignError("exponent list is empty")
    return out


def parse_words(expr: str, spec: DesignSpec) -> list[tuple[Exponent, int]]:
    """Generator words ``"11100:0,10011:0"``: each ``alpha:h`` asks for ``X^alpha = omega_h``."""
    words = []
    for part in expr.split(";" if ";" in expr else ","):
        part = part.strip()
        if not part:
            continue
        alpha, sep, h = part.partition(":")
        if not sep:
            raise DesignError(f"word {part!r} needs the form alpha:h")
        words.append((parse_exponent(alpha, spec), int(h)))
    if not words:
        raise DesignError("no generator words given")
    return words


def parse_levels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise DesignError(f"levels must be comma-separated integers, got {text!r}") from None


def parse_bounds(text: str, n_points: int, has_aux: bool) -> np.ndarray:
    """Bounds as ``"Y"``, ``"Y:AUX"`` or a full comma-separated list."""
    n = n_points + has_aux
    text = text.strip()
    if "," in text:
        vals = [int(v) for v in text.split(",")]
        if len(vals) != n:
            raise DesignError(f"bound vector has length {len(vals)}, expected {n}")
        return np.array(vals, dtype=np.int64)
    y, sep, aux = text.partition(":")
    out = np.full(n, int(y), dtype=np.int64)
    if has_aux:
        if not sep:
            raise DesignError("this system has an auxiliary column; give bounds as Y:AUX")
        out[-1] = int(aux)
    elif sep:
        raise DesignError("this system has no auxiliary column; give bounds as Y")
    return out


def format_vector(v: Sequence[int]) -> str:
    return " ".join(str(int(x)) for x in v)
