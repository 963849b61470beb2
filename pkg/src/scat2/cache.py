"""Line-based text caches for coefficient tables, fitted polynomials and reports.

Grammar (UTF-8, one record per ``\\n``-terminated line)::

    scat2 v1 <numeric|symbolic> b=<int|sym> c=<int|sym> D=<int> [created=<iso-8601>]
    tau <i> <j> <rational>                    # numeric body
    tau <i> <j> poly: <canonical polynomial>  # symbolic body
    conj <id> <verified|falsified|inconclusive> <range-spec> [witness: <text>]

Records are sorted by ``(i + j, i)``.  The ``created`` token is the only
non-canonical part of a file.
"""

from __future__ import annotations

import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .engine import TauTable
from .ring import Poly3, format_rational, from_text, parse_rational, to_text

MAGIC = "scat2"
VERSION = "v1"

_HEADER = re.compile(
    r"^scat2 (?P<ver>v\d+) (?P<kind>numeric|symbolic) b=(?P<b>\d+|sym) c=(?P<c>\d+|sym) D=(?P<D>\d+)"
    r"(?: created=(?P<created>\S+))?$"
)


class CacheFormatError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Header:
    kind: str
    b: int | None
    c: int | None
    D: int
    created: str | None = None

    def render(self) -> str:
        b = "sym" if self.b is None else str(self.b)
        c = "sym" if self.c is None else str(self.c)
        text = f"{MAGIC} {VERSION} {self.kind} b={b} c={c} D={self.D}"
        if self.created:
            text += f" created={self.created}"
        return text


def _order(item):
    (i, j), _ = item
    return (i + j, i)


def encode_table(table: TauTable, created: str | None = None) -> bytes:
    lines = [Header("numeric", table.b, table.c, table.D, created).render()]
    for i, j, v in table.entries():
        lines.append(f"tau {i} {j} {format_rational(v)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def encode_polys(polys: dict[tuple[int, int], Poly3], created: str | None = None) -> bytes:
    D = max((i + j for i, j in polys), default=0)
    lines = [Header("symbolic", None, None, D, created).render()]
    for (i, j), p in sorted(polys.items(), key=_order):
        lines.append(f"tau {i} {j} poly: {to_text(p)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_header(line: str) -> Header:
    m = _HEADER.match(line)
    if not m:
        if line.startswith(MAGIC + " ") and line.split(" ")[1] != VERSION:
            raise CacheFormatError(1, f"unsupported version {line.split(' ')[1]!r} (expected {VERSION})")
        raise CacheFormatError(1, "malformed header")
    if m["ver"] != VERSION:
        raise CacheFormatError(1, f"unsupported version {m['ver']!r} (expected {VERSION})")
    kind = m["kind"]
    b = None if m["b"] == "sym" else int(m["b"])
    c = None if m["c"] == "sym" else int(m["c"])
    if (kind == "numeric") != (b is not None and c is not None):
        raise CacheFormatError(1, "numeric caches need integer b and c; symbolic caches use b=sym c=sym")
    return Header(kind, b, c, int(m["D"]), m["created"])


def _lines(data: bytes | str) -> list[str]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if not text.endswith("\n"):
        raise CacheFormatError(text.count("\n") + 1, "missing final newline")
    if "\t" in text:
        raise CacheFormatError(text[: text.index("\t")].count("\n") + 1, "tab character")
    return text[:-1].split("\n")


def decode(data: bytes | str):
    """Decode a table or polynomial cache.

    Returns ``(header, TauTable)`` for numeric caches and
    ``(header, {(i, j): Poly3})`` for symbolic ones.
    """
    lines = _lines(data)
    header = parse_header(lines[0])
    body: dict[tuple[int, int], object] = {}
    last = None
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split(" ", 3)
        if len(parts) < 4 or parts[0] != "tau":
            raise CacheFormatError(n, "expected 'tau <i> <j> <value>'")
        try:
            i, j = int(parts[1]), int(parts[2])
        except ValueError:
            raise CacheFormatError(n, "indices must be decimal integers") from None
        if i < 0 or j < 0 or i + j > header.D:
            raise CacheFormatError(n, f"index ({i},{j}) outside degree {header.D}")
        if (i, j) in body:
            raise CacheFormatError(n, f"duplicate record ({i},{j})")
        key = (i + j, i)
        if last is not None and key < last:
            raise CacheFormatError(n, "records out of order")
        last = key
        value = parts[3]
        try:
            if header.kind == "numeric":
                body[(i, j)] = parse_rational(value)
            else:
                if not value.startswith("poly: "):
                    raise ValueError("symbolic records need 'poly: '")
                body[(i, j)] = from_text(value[len("poly: "):])
        except ValueError as exc:
            raise CacheFormatError(n, str(exc)) from None
    if header.kind == "numeric":
        values = {k: v for k, v in body.items() if v}
        return header, TauTable(header.b, header.c, header.D, values)
    return header, body


def decode_table(data: bytes | str) -> TauTable:
    header, table = decode(data)
    if header.kind != "numeric":
        raise CacheFormatError(1, "expected a numeric cache")
    return table


def decode_polys(data: bytes | str) -> dict[tuple[int, int], Poly3]:
    header, polys = decode(data)
    if header.kind != "symbolic":
        raise CacheFormatError(1, "expected a symbolic cache")
    return polys


def atomic_write(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temporary sibling and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


# -- conjecture reports ----------------------------------------------------

def encode_report_line(conj_id: int, status: str, range_spec: str, witness: str | None = None) -> str:
    word = {"verified-in-range": "verified"}.get(status, status)
    if word not in ("verified", "falsified", "inconclusive"):
        raise ValueError(f"unknown status {status!r}")
    if " " in range_spec or not range_spec:
        raise ValueError("range spec must be a nonempty token without spaces")
    line = f"conj {conj_id} {word} {range_spec}"
    if witness:
        line += " witness: " + " ".join(witness.split())
    return line


_CONJ = re.compile(r"^conj (\d+) (verified|falsified|inconclusive) (\S+)(?: witness: (.+))?$")


def decode_report_line(line: str) -> tuple[int, str, str, str | None]:
    m = _CONJ.match(line)
    if not m:
        raise ValueError(f"malformed report record: {line!r}")
    return int(m[1]), m[2], m[3], m[4]
