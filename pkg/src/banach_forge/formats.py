"""Text formats for spaces and operators.

Space::

    space <name> dim <d>
    vertex <x_1> ... <x_d>

Operator (one ``row`` per codomain coordinate)::

    operator <name> <domain-name> <codomain-name>
    row <a_1> ... <a_n>

Numbers are integers or ``p/q``.  Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

from pathlib import Path

from .errors import DegenerateSpace, DimensionMismatch, ParseError
from .rational import Matrix, fmt, parse_rational
from .spaces import Operator, PolyBanachSpace


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _numbers(fields, no):
    try:
        return tuple(parse_rational(x) for x in fields)
    except ParseError as exc:
        raise ParseError(f"line {no}: {exc}") from None


def dump_space(space: PolyBanachSpace, name: str | None = None) -> str:
    out = [f"space {name or space.name or 'X'} dim {space.dim}"]
    out += ["vertex " + " ".join(fmt(c) for c in v) if v else "vertex" for v in space.vertices]
    return "\n".join(out) + "\n"


def _space_blocks(text: str) -> list:
    blocks, cur = [], None
    for no, f in _lines(text):
        if f[0] == "space":
            if len(f) != 4 or f[2] != "dim":
                raise ParseError(f"line {no}: expected 'space <name> dim <d>'")
            try:
                d = int(f[3])
            except ValueError:
                raise ParseError(f"line {no}: bad dimension {f[3]!r}") from None
            if d < 0:
                raise ParseError(f"line {no}: negative dimension")
            cur = [f[1], d, []]
            blocks.append(cur)
        elif f[0] == "vertex":
            if cur is None:
                raise ParseError(f"line {no}: vertex before space header")
            v = _numbers(f[1:], no)
            if len(v) != cur[1]:
                raise DimensionMismatch(f"line {no}: vertex has {len(v)} coordinates, expected {cur[1]}")
            cur[2].append(v)
        else:
            raise ParseError(f"line {no}: unknown keyword {f[0]!r}")
    return blocks


def parse_spaces(text: str) -> list:
    """All space blocks in ``text``, in order.

    Vertex lists may be redundant; each space is the symmetric hull of
    its listed points.
    """
    out = []
    for name, d, verts in _space_blocks(text):
        if d and not verts:
            raise DegenerateSpace(f"space {name} has no vertices")
        out.append(PolyBanachSpace.from_points(verts, dim=d, name=name))
    return out


def parse_space(text: str, canonical: bool = False) -> PolyBanachSpace:
    """One space block.  With ``canonical`` the vertex list is trusted as
    already sorted and irredundant (files this package wrote)."""
    blocks = _space_blocks(text)
    if len(blocks) != 1:
        raise ParseError(f"expected one space block, found {len(blocks)}")
    name, d, verts = blocks[0]
    if canonical:
        return PolyBanachSpace(d, tuple(verts), name)
    if d and not verts:
        raise DegenerateSpace(f"space {name} has no vertices")
    return PolyBanachSpace.from_points(verts, dim=d, name=name)


def dump_operator(op: Operator, name: str, domain_name: str | None = None, codomain_name: str | None = None) -> str:
    out = [f"operator {name} {domain_name or op.domain.name or 'X'} {codomain_name or op.codomain.name or 'Y'}"]
    for r in op.matrix.rows:
        out.append(("row " + " ".join(fmt(c) for c in r)) if r else "row")
    return "\n".join(out) + "\n"


def parse_operator(text: str, spaces: dict) -> tuple:
    """(name, Operator); ``spaces`` maps names to spaces for the header."""
    header, rows = None, []
    for no, f in _lines(text):
        if f[0] == "operator":
            if header is not None or len(f) != 4:
                raise ParseError(f"line {no}: expected one 'operator <name> <domain> <codomain>' header")
            header = f[1:]
        elif f[0] == "row":
            if header is None:
                raise ParseError(f"line {no}: row before operator header")
            rows.append(_numbers(f[1:], no))
        else:
            raise ParseError(f"line {no}: unknown keyword {f[0]!r}")
    if header is None:
        raise ParseError("missing operator header")
    name, dn, cn = header
    try:
        dom, cod = spaces[dn], spaces[cn]
    except KeyError as exc:
        raise ParseError(f"operator {name} refers to unknown space {exc.args[0]!r}") from None
    if len(rows) != cod.dim or any(len(r) != dom.dim for r in rows):
        raise DimensionMismatch(f"operator {name}: expected {cod.dim} rows of length {dom.dim}")
    return name, Operator(dom, cod, Matrix(rows, ncols=dom.dim))


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc.reason})") from None
