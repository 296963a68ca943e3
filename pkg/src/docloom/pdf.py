"""Minimal PDF text extraction backend.

Walks the page tree and pulls the strings shown by Tj / TJ / ' / "
operators out of each page's content stream (raw or FlateDecode).
Covers the straightforward PDFs produced by common report generators;
scanned pages, exotic filters, and CID-encoded fonts are out of scope
and extraction output is treated as golden-file data by the tests.
"""

from __future__ import annotations

import base64
import re
import zlib

from .errors import MalformedDocumentError

_OBJ_RE = re.compile(rb"(\d+)\s+\d+\s+obj\b")
_ROOT_RE = re.compile(rb"/Root\s+(\d+)\s+\d+\s+R")
_REF_RE = re.compile(rb"(\d+)\s+\d+\s+R")
_STREAM_RE = re.compile(rb"stream\r?\n")
_LENGTH_RE = re.compile(rb"/Length\s+(\d+)(?![\s\d]*R)")
_FILTER_RE = re.compile(rb"/Filter\s*(\[[^\]]*\]|/\w+)")
_NAME_RE = re.compile(rb"/(\w+)")

# operators that show text or move to a new line
_TEXT_OP_RE = re.compile(
    rb"""
    \((?P<lit>(?:\\.|[^\\()])*)\)      # literal string (no nesting needed post-escape)
    | <(?P<hex>[0-9A-Fa-f\s]*)>        # hex string
    | \[(?P<arr>(?:\\.|[^\]])*)\]\s*TJ # array + TJ
    | (?P<op>T\*|Td|TD|Tj|'|")         # positioning / show operators
    """,
    re.VERBOSE | re.DOTALL,
)

_ESCAPES = {
    b"n": b"\n", b"r": b"\r", b"t": b"\t", b"b": b"\b", b"f": b"\f",
    b"(": b"(", b")": b")", b"\\": b"\\",
}


class _Obj:
    __slots__ = ("header", "stream")

    def __init__(self, header: bytes, stream: bytes | None):
        self.header = header
        self.stream = stream


def _parse_objects(data: bytes) -> dict[int, _Obj]:
    objects: dict[int, _Obj] = {}
    for m in _OBJ_RE.finditer(data):
        num = int(m.group(1))
        end = data.find(b"endobj", m.end())
        if end < 0:
            continue
        body = data[m.end():end]
        sm = _STREAM_RE.search(body)
        if sm:
            header = body[: sm.start()]
            lm = _LENGTH_RE.search(header)
            if lm:  # direct length is authoritative; binary data may
                tail = sm.end() + int(lm.group(1))  # contain "endstream"
            else:
                tail = body.find(b"endstream", sm.end())
                if tail < 0:
                    raise MalformedDocumentError(f"object {num}: unterminated stream")
            stream = body[sm.end():tail].rstrip(b"\r\n")
            objects[num] = _Obj(header, stream)
        else:
            objects[num] = _Obj(body, None)
    return objects


def _filters(header: bytes) -> list[bytes]:
    m = _FILTER_RE.search(header)
    return [n.group(1) for n in _NAME_RE.finditer(m.group(1))] if m else []


def _decode_stream(obj: _Obj) -> bytes:
    if obj.stream is None:
        return b""
    data = obj.stream
    for name in _filters(obj.header):
        if name == b"FlateDecode":
            try:
                data = zlib.decompress(data)
            except zlib.error as exc:
                raise MalformedDocumentError(f"bad FlateDecode stream: {exc}") from exc
        elif name == b"ASCII85Decode":
            try:
                data = base64.a85decode(re.sub(rb"\s+", b"", data), adobe=True)
            except ValueError as exc:
                raise MalformedDocumentError(f"bad ASCII85 stream: {exc}") from exc
        else:
            raise MalformedDocumentError(
                f"unsupported stream filter: {name.decode('latin-1')}")
    return data


def _dict_ref(header: bytes, key: bytes) -> int | None:
    m = re.search(re.escape(key) + rb"\s+(\d+)\s+\d+\s+R", header)
    return int(m.group(1)) if m else None


def _dict_array(header: bytes, key: bytes) -> list[int]:
    m = re.search(re.escape(key) + rb"\s*\[(.*?)\]", header, re.DOTALL)
    if m:
        return [int(r.group(1)) for r in _REF_RE.finditer(m.group(1))]
    ref = _dict_ref(header, key)
    return [ref] if ref is not None else []


def _collect_pages(objects: dict[int, _Obj], node: int, out: list[int],
                   seen: set[int]) -> None:
    if node in seen or node not in objects:
        return
    seen.add(node)
    header = objects[node].header
    if b"/Kids" in header:
        for kid in _dict_array(header, b"/Kids"):
            _collect_pages(objects, kid, out, seen)
    elif re.search(rb"/Type\s*/Page\b", header):
        out.append(node)


def _unescape_literal(raw: bytes) -> bytes:
    out = bytearray()
    i = 0
    while i < len(raw):
        c = raw[i:i + 1]
        if c != b"\\":
            out += c
            i += 1
            continue
        nxt = raw[i + 1:i + 2]
        if nxt in _ESCAPES:
            out += _ESCAPES[nxt]
            i += 2
        elif (oct_m := re.match(rb"[0-7]{1,3}", raw[i + 1:i + 4])) is not None:
            out.append(int(oct_m.group(0), 8) & 0xFF)
            i += 1 + len(oct_m.group(0))
        elif nxt in (b"\n", b"\r"):
            i += 2  # line continuation
        else:
            out += nxt
            i += 2
    return bytes(out)


def _decode_hex(raw: bytes) -> bytes:
    digits = re.sub(rb"\s+", b"", raw)
    if len(digits) % 2:
        digits += b"0"
    return bytes.fromhex(digits.decode("ascii"))


def _stream_text(content: bytes) -> str:
    pieces: list[str] = []

    def newline() -> None:
        if pieces and not pieces[-1].endswith("\n"):
            pieces.append("\n")

    pending: list[str] = []  # strings seen since the last operator
    for m in _TEXT_OP_RE.finditer(content):
        if m.group("lit") is not None:
            pending.append(_unescape_literal(m.group("lit")).decode("latin-1"))
        elif m.group("hex") is not None:
            pending.append(_decode_hex(m.group("hex")).decode("latin-1"))
        elif m.group("arr") is not None:
            text = "".join(
                _unescape_literal(s.group("lit")).decode("latin-1")
                if s.group("lit") is not None
                else _decode_hex(s.group("hex")).decode("latin-1")
                for s in _TEXT_OP_RE.finditer(m.group("arr"))
                if s.group("lit") is not None or s.group("hex") is not None
            )
            pieces.append(text)
            pending.clear()
        else:
            op = m.group("op")
            if op in (b"Td", b"TD", b"T*"):
                newline()
                pending.clear()
            elif op == b"Tj":
                if pending:
                    pieces.append(pending.pop())
                pending.clear()
            elif op in (b"'", b'"'):
                newline()
                if pending:
                    pieces.append(pending.pop())
                pending.clear()
    return "".join(pieces).strip("\n")


def extract_pdf_pages(data: bytes) -> list[str]:
    """Extract text per page, in page-tree order.

    Raises MalformedDocumentError when the bytes are not a parsable PDF.
    """
    if not data.startswith(b"%PDF-"):
        raise MalformedDocumentError("missing %PDF header")
    objects = _parse_objects(data)
    root = None
    for m in _ROOT_RE.finditer(data):
        root = int(m.group(1))  # last trailer wins
    if root is None or root not in objects:
        for num, obj in objects.items():
            if re.search(rb"/Type\s*/Catalog\b", obj.header):
                root = num
                break
    if root is None:
        raise MalformedDocumentError("no document catalog")
    pages_root = _dict_ref(objects[root].header, b"/Pages")
    if pages_root is None:
        raise MalformedDocumentError("catalog has no page tree")
    page_nums: list[int] = []
    _collect_pages(objects, pages_root, page_nums, set())
    if not page_nums:
        raise MalformedDocumentError("page tree is empty")

    pages: list[str] = []
    for num in page_nums:
        chunks = []
        for ref in _dict_array(objects[num].header, b"/Contents"):
            if ref in objects:
                chunks.append(_decode_stream(objects[ref]))
        pages.append(_stream_text(b"".join(chunks)))
    return pages
