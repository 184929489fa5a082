"""Plain-text instance files and key=value run records.

Instance file layout::

    # name: example        (optional metadata comments)
    # seed: 7
    points 8 3             (kind, n, d)
    <d rows of n numbers>  (columns are points; a psd-matrix has n rows)

Numbers are written with 17 significant digits so a write/read round trip is
exact.
"""
from __future__ import annotations

import io as _io
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

KINDS = ("psd-matrix", "points", "general-matrix")


@dataclass
class InstanceFile:
    kind: str
    payload: np.ndarray
    name: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParseError(f"unknown kind {self.kind!r}")
        self.payload = np.asarray(self.payload, dtype=float)
        if self.payload.ndim != 2:
            raise ParseError("payload must be a rectangular grid")
        if self.kind == "psd-matrix":
            P = self.payload
            if P.shape[0] != P.shape[1]:
                raise ParseError("psd-matrix payload must be square")
            if np.max(np.abs(P - P.T), initial=0.0) > 1e-9 * (1.0 + np.max(np.abs(P), initial=0.0)):
                raise ParseError("psd-matrix payload is not symmetric")

    @property
    def n(self):
        return self.payload.shape[1]

    @property
    def d(self):
        return self.payload.shape[0]


def fmt(x):
    return format(float(x), ".17g")


def dumps(inst):
    buf = _io.StringIO()
    if inst.name is not None:
        buf.write(f"# name: {inst.name}\n")
    if inst.seed is not None:
        buf.write(f"# seed: {inst.seed}\n")
    buf.write(f"{inst.kind} {inst.n} {inst.d}\n")
    for row in inst.payload:
        buf.write(" ".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def loads(text):
    meta = {}
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line, _, comment = raw.partition("#")
        if comment and ":" in comment and not line.strip():
            key, _, value = comment.partition(":")
            meta[key.strip()] = value.strip()
        if line.strip():
            lines.append((lineno, line.split()))
    if not lines:
        raise ParseError("empty instance file")
    lineno, header = lines[0]
    if len(header) != 3 or header[0] not in KINDS:
        raise ParseError(f"line {lineno}: expected header 'kind n d' with kind in {KINDS}")
    kind = header[0]
    try:
        n, d = int(header[1]), int(header[2])
    except ValueError:
        raise ParseError(f"line {lineno}: n and d must be integers") from None
    rows = []
    for lineno, toks in lines[1:]:
        if len(toks) != n:
            raise ParseError(f"line {lineno}: expected {n} numbers, got {len(toks)}")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric entry") from None
    if len(rows) != d:
        raise ParseError(f"expected {d} data rows, got {len(rows)}")
    seed = meta.get("seed")
    try:
        seed = int(seed) if seed is not None else None
    except ValueError:
        raise ParseError(f"bad seed metadata {seed!r}") from None
    return InstanceFile(kind, np.array(rows).reshape(d, n), meta.get("name"), seed)


def write_instance(inst, path):
    with open(path, "w") as fh:
        fh.write(dumps(inst))


def read_instance(path):
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _value(v):
    if v is None:
        return "-"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_value(x) for x in v) or "-"
    return str(v).replace(" ", "_")


def record(fields):
    """One ``key=value`` line; keys keep insertion order."""
    return " ".join(f"{k}={_value(v)}" for k, v in fields.items())


def parse_record(line):
    out = {}
    for tok in line.split():
        key, sep, value = tok.partition("=")
        if not sep:
            raise ParseError(f"malformed record token {tok!r}")
        out[key] = value
    return out
