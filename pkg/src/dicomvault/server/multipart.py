"""Byte-exact multipart/related parsing and assembly (binary payloads, no email heuristics)."""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass


class MultipartError(Exception):
    pass


@dataclass
class Part:
    headers: dict[str, str]  # lower-cased names
    content: bytes


_BOUNDARY_RE = re.compile(r'boundary="?([^";]+)"?', re.IGNORECASE)
_TYPE_RE = re.compile(r'type="?([^";]+)"?', re.IGNORECASE)


def boundary_of(content_type: str) -> str:
    match = _BOUNDARY_RE.search(content_type or "")
    if not match:
        raise MultipartError("content type lacks a boundary parameter")
    return match.group(1)


def related_type_of(content_type: str) -> str | None:
    match = _TYPE_RE.search(content_type or "")
    return match.group(1) if match else None


def parse_multipart_related(body: bytes, content_type: str) -> list[Part]:
    if not (content_type or "").lower().startswith("multipart/related"):
        raise MultipartError(f"not multipart/related: {content_type!r}")
    delim = b"--" + boundary_of(content_type).encode("ascii")
    start = body.find(delim)
    if start < 0:
        raise MultipartError("opening boundary not found")
    parts: list[Part] = []
    cursor = start + len(delim)
    while True:
        if body[cursor : cursor + 2] == b"--":
            return parts
        if body[cursor : cursor + 2] != b"\r\n":
            raise MultipartError("boundary not followed by CRLF or terminator")
        cursor += 2
        header_end = body.find(b"\r\n\r\n", cursor)
        if header_end < 0:
            raise MultipartError("part headers never terminate")
        headers: dict[str, str] = {}
        for line in body[cursor:header_end].split(b"\r\n"):
            if not line:
                continue
            name, sep, value = line.partition(b":")
            if not sep:
                raise MultipartError(f"broken part header line {line!r}")
            headers[name.decode("latin-1").strip().lower()] = value.decode("latin-1").strip()
        content_start = header_end + 4
        next_delim = body.find(b"\r\n" + delim, content_start)
        if next_delim < 0:
            raise MultipartError("closing boundary not found")
        parts.append(Part(headers, body[content_start:next_delim]))
        cursor = next_delim + 2 + len(delim)


def build_multipart_related(parts: list[tuple[str, bytes]],
                            related_type: str) -> tuple[bytes, str]:
    """Assemble parts into a body; returns (body, full content-type header value)."""
    boundary = uuid.uuid4().hex
    chunks = []
    for content_type, payload in parts:
        chunks.append(
            f"--{boundary}\r\nContent-Type: {content_type}\r\n"
            f"Content-Length: {len(payload)}\r\n\r\n".encode("ascii") + payload)
    body = b"\r\n".join(chunks) + f"\r\n--{boundary}--".encode("ascii")
    header = f'multipart/related; type="{related_type}"; boundary={boundary}'
    return body, header
