"""Minimal PDF layout reader: text runs and image placements per page.

Supports the subset of PDF that textbook-style documents (and our
reportlab-built fixtures) use: indirect objects, ASCII85/Flate stream
filters, DCT (JPEG) images, and content streams drawing text via
BT/Tm/Td/Tj/TJ and images via q/cm/Do/Q. No external PDF library is
required; anything outside this subset raises PdfReadError.
"""

from __future__ import annotations

import base64
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

_OBJ_RE = re.compile(rb"(\d+)\s+0\s+obj(.*?)endobj", re.S)
_STREAM_RE = re.compile(rb"stream\r?\n(.*?)\s*endstream", re.S)
_REF_RE = re.compile(rb"(\d+)\s+0\s+R")
_FILTER_RE = re.compile(rb"/Filter\s*(?:\[([^\]]*)\]|/([A-Za-z0-9]+))")
_NAME_RE = re.compile(rb"/([A-Za-z0-9.#_-]+)")


class PdfReadError(ValueError):
    pass


@dataclass(frozen=True)
class TextRun:
    x: float
    y: float
    text: str


@dataclass(frozen=True)
class ImagePlacement:
    name: str
    x: float
    y: float
    width: float
    height: float
    data: bytes
    image_format: str  # "jpeg" or "raw"
    pixel_width: int = 0
    pixel_height: int = 0

    @property
    def top(self) -> float:
        return self.y + self.height


@dataclass
class PdfPage:
    number: int  # 1-based
    text_runs: list[TextRun] = field(default_factory=list)
    images: list[ImagePlacement] = field(default_factory=list)


class PdfDocument:
    def __init__(self, pages: list[PdfPage]):
        self.pages = pages

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> "PdfDocument":
        return cls.from_bytes(Path(path).read_bytes())

    @classmethod
    def from_bytes(cls, raw: bytes) -> "PdfDocument":
        if not raw.startswith(b"%PDF"):
            raise PdfReadError("not a PDF file")
        objects = {int(m.group(1)): m.group(2) for m in _OBJ_RE.finditer(raw)}
        if not objects:
            raise PdfReadError("no PDF objects found")
        page_order = _page_order(objects)
        pages = []
        for index, obj_num in enumerate(page_order, start=1):
            pages.append(_read_page(index, objects[obj_num], objects))
        return cls(pages)


def _page_order(objects: dict[int, bytes]) -> list[int]:
    """Page objects in document order (via the page tree when present)."""
    page_nums = {
        num
        for num, body in objects.items()
        if re.search(rb"/Type\s*/Page\b", body) and b"/Pages" not in body
    }
    for body in objects.values():
        if re.search(rb"/Type\s*/Pages\b", body):
            kids_match = re.search(rb"/Kids\s*\[([^\]]*)\]", body)
            if kids_match:
                kids = [int(m.group(1)) for m in _REF_RE.finditer(kids_match.group(1))]
                if kids and all(k in page_nums for k in kids):
                    return kids
    if not page_nums:
        raise PdfReadError("PDF has no pages")
    return sorted(page_nums)


def _stream_filters(body: bytes) -> list[bytes]:
    match = _FILTER_RE.search(body)
    if not match:
        return []
    if match.group(2):
        return [match.group(2)]
    return [m.group(1) for m in _NAME_RE.finditer(match.group(1))]


def _decode_stream(body: bytes) -> tuple[bytes, str]:
    """Decoded stream bytes plus a format tag ("text", "jpeg", "raw")."""
    match = _STREAM_RE.search(body)
    if match is None:
        raise PdfReadError("object has no stream")
    data = match.group(1)
    kind = "text"
    for name in _stream_filters(body):
        if name == b"ASCII85Decode":
            end = data.find(b"~>")
            data = base64.a85decode(data[: end + 2] if end >= 0 else data, adobe=end >= 0)
        elif name == b"FlateDecode":
            data = zlib.decompress(data)
        elif name == b"DCTDecode":
            return data, "jpeg"  # JPEG payload kept as-is
        else:
            return data, "raw"
    return data, kind


def _int_field(body: bytes, key: bytes, default: int = 0) -> int:
    match = re.search(rb"/" + key + rb"\s+(\d+)", body)
    return int(match.group(1)) if match else default


def _contents_bytes(page_body: bytes, objects: dict[int, bytes]) -> bytes:
    match = re.search(rb"/Contents\s+(?:(\d+)\s+0\s+R|\[([^\]]*)\])", page_body)
    if not match:
        return b""
    refs = [int(match.group(1))] if match.group(1) else [
        int(m.group(1)) for m in _REF_RE.finditer(match.group(2))
    ]
    parts = []
    for ref in refs:
        if ref not in objects:
            raise PdfReadError(f"missing content object {ref}")
        data, kind = _decode_stream(objects[ref])
        if kind != "text":
            raise PdfReadError("unsupported content-stream encoding")
        parts.append(data)
    return b"\n".join(parts)


def _xobjects(page_body: bytes, objects: dict[int, bytes]) -> dict[str, ImagePlacement]:
    """Image XObjects by resource name (placement geometry filled later)."""
    match = re.search(rb"/XObject\s*<<(.*?)>>", page_body, re.S)
    if not match:
        return {}
    out: dict[str, ImagePlacement] = {}
    for pair in re.finditer(rb"/([^\s/<>\[\]()]+)\s+(\d+)\s+0\s+R", match.group(1)):
        name = pair.group(1).decode("latin-1")
        ref = int(pair.group(2))
        body = objects.get(ref)
        if body is None or not re.search(rb"/Subtype\s*/Image", body):
            continue
        data, kind = _decode_stream(body)
        out[name] = ImagePlacement(
            name=name,
            x=0.0,
            y=0.0,
            width=0.0,
            height=0.0,
            data=data,
            image_format=kind if kind != "text" else "raw",
            pixel_width=_int_field(body, b"Width"),
            pixel_height=_int_field(body, b"Height"),
        )
    return out


# ---------------------------------------------------------------------------
# Content-stream interpretation

_IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def _mat_mul(a, b):
    """Matrix product a*b for row-vector PDF matrices [a b c d e f]."""
    return (
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
        a[4] * b[0] + a[5] * b[2] + b[4],
        a[4] * b[1] + a[5] * b[3] + b[5],
    )


def _apply(m, x, y):
    return (m[0] * x + m[2] * y + m[4], m[1] * x + m[3] * y + m[5])


def _tokenize_content(data: bytes):
    """Yield ("num"|"name"|"str"|"op"|"arr", value) tokens."""
    i = 0
    n = len(data)
    while i < n:
        ch = data[i : i + 1]
        if ch.isspace():
            i += 1
            continue
        if ch == b"(":
            text, i = _read_string(data, i)
            yield "str", text
        elif ch == b"/":
            match = _NAME_RE.match(data, i)
            if not match:
                raise PdfReadError(f"bad name token at {i}")
            yield "name", match.group(1).decode("latin-1")
            i = match.end()
        elif ch in b"[]":
            yield "arr", ch.decode()
            i += 1
        elif ch == b"<":
            end = data.find(b">", i)
            if end < 0:
                raise PdfReadError("unterminated hex string")
            yield "str", bytes.fromhex(data[i + 1 : end].decode("latin-1")).decode("latin-1")
            i = end + 1
        else:
            match = re.match(rb"[-+.\d]+|[A-Za-z'\"*]+", data[i:])
            if not match:
                raise PdfReadError(f"bad content token at {i}: {data[i:i+10]!r}")
            token = match.group(0)
            i += len(token)
            try:
                yield "num", float(token)
            except ValueError:
                yield "op", token.decode("latin-1")


def _read_string(data: bytes, start: int) -> tuple[str, int]:
    out = []
    depth = 0
    i = start
    while i < len(data):
        ch = data[i : i + 1]
        if ch == b"\\":
            nxt = data[i + 1 : i + 2]
            escapes = {b"n": "\n", b"r": "\r", b"t": "\t", b"(": "(", b")": ")", b"\\": "\\"}
            if nxt in escapes:
                out.append(escapes[nxt])
                i += 2
                continue
            octal = re.match(rb"\\([0-7]{1,3})", data[i:])
            if octal:
                out.append(chr(int(octal.group(1), 8)))
                i += len(octal.group(0))
                continue
            i += 1
            continue
        if ch == b"(":
            depth += 1
            if depth > 1:
                out.append("(")
            i += 1
            continue
        if ch == b")":
            depth -= 1
            if depth == 0:
                return "".join(out), i + 1
            out.append(")")
            i += 1
            continue
        out.append(ch.decode("latin-1"))
        i += 1
    raise PdfReadError("unterminated string in content stream")


def _read_page(number: int, body: bytes, objects: dict[int, bytes]) -> PdfPage:
    page = PdfPage(number)
    xobjects = _xobjects(body, objects)
    content = _contents_bytes(body, objects)
    ctm_stack: list[tuple] = []
    ctm = _IDENTITY
    text_matrix = _IDENTITY
    line_matrix = _IDENTITY
    leading = 0.0
    stack: list = []

    def show(text: str) -> None:
        if not text.strip():
            return
        x, y = _apply(_mat_mul(text_matrix, ctm), 0.0, 0.0)
        page.text_runs.append(TextRun(x, y, text))

    def next_line() -> None:
        nonlocal text_matrix, line_matrix
        line_matrix = _mat_mul((1, 0, 0, 1, 0, -leading), line_matrix)
        text_matrix = line_matrix

    for kind, value in _tokenize_content(content):
        if kind in ("num", "name", "str"):
            stack.append((kind, value))
            continue
        if kind == "arr":
            stack.append((kind, value))
            continue
        op = value
        if op == "q":
            ctm_stack.append(ctm)
        elif op == "Q":
            ctm = ctm_stack.pop() if ctm_stack else _IDENTITY
        elif op == "cm":
            nums = [v for k, v in stack[-6:] if k == "num"]
            if len(nums) == 6:
                ctm = _mat_mul(tuple(nums), ctm)
        elif op == "BT":
            text_matrix = _IDENTITY
            line_matrix = _IDENTITY
        elif op == "Tm":
            nums = [v for k, v in stack[-6:] if k == "num"]
            if len(nums) == 6:
                text_matrix = tuple(nums)
                line_matrix = text_matrix
        elif op in ("Td", "TD"):
            nums = [v for k, v in stack[-2:] if k == "num"]
            if len(nums) == 2:
                if op == "TD":
                    leading = -nums[1]
                line_matrix = _mat_mul((1, 0, 0, 1, nums[0], nums[1]), line_matrix)
                text_matrix = line_matrix
        elif op == "TL":
            nums = [v for k, v in stack[-1:] if k == "num"]
            if nums:
                leading = nums[0]
        elif op == "T*":
            next_line()
        elif op == "Tj":
            if stack and stack[-1][0] == "str":
                show(stack[-1][1])
        elif op == "'":
            next_line()
            if stack and stack[-1][0] == "str":
                show(stack[-1][1])
        elif op == "TJ":
            pieces = []
            for k, v in reversed(stack):
                if k == "arr" and v == "[":
                    break
                if k == "str":
                    pieces.append(v)
            show("".join(reversed(pieces)))
        elif op == "Do":
            if stack and stack[-1][0] == "name":
                template = xobjects.get(stack[-1][1])
                if template is not None:
                    corners = [_apply(ctm, cx, cy) for cx in (0.0, 1.0) for cy in (0.0, 1.0)]
                    xs = [c[0] for c in corners]
                    ys = [c[1] for c in corners]
                    page.images.append(
                        ImagePlacement(
                            name=template.name,
                            x=min(xs),
                            y=min(ys),
                            width=max(xs) - min(xs),
                            height=max(ys) - min(ys),
                            data=template.data,
                            image_format=template.image_format,
                            pixel_width=template.pixel_width,
                            pixel_height=template.pixel_height,
                        )
                    )
        if op not in ("q", "Q"):
            stack.clear()
    return page
