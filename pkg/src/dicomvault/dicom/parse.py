"""Part-10 file parsing.

Reads the 128-byte preamble + DICM magic, the explicit-VR little-endian
group-0002 file meta, then the dataset in the encoding named by the
transfer syntax. Pixel data is never copied: defined-length payloads are
recorded as a byte-range locator into the original buffer.
"""

from __future__ import annotations

import struct
import zlib

from . import tags
from .dataset import (
    FLOAT_VRS,
    INT_VRS,
    SINGLE_VALUE_TEXT_VRS,
    STRING_VRS,
    DataElement,
    DicomObject,
    PixelLocator,
)
from .errors import InvalidPreamble, MalformedDataset, TruncatedElement
from .tags import DicomTag

UNDEFINED_LENGTH = 0xFFFFFFFF
MAX_SEQUENCE_DEPTH = 16

# Explicit VR codes carrying a 2-byte reserved field and a 4-byte length
_LONG_FORM_VRS = {"OB", "OD", "OF", "OL", "OW", "SQ", "UC", "UN", "UR", "UT"}

_INT_FORMATS = {"US": "H", "SS": "h", "UL": "I", "SL": "i"}
_FLOAT_FORMATS = {"FL": "f", "FD": "d"}
_INT_SIZES = {"US": 2, "SS": 2, "UL": 4, "SL": 4}


class _Reader:
    """Bounded cursor over the file bytes; every short read is a structured error."""

    __slots__ = ("data", "pos", "end")

    def __init__(self, data: bytes, pos: int = 0, end: int | None = None):
        self.data = data
        self.pos = pos
        self.end = len(data) if end is None else end

    @property
    def remaining(self) -> int:
        return self.end - self.pos

    def read(self, n: int) -> bytes:
        if n < 0 or self.pos + n > self.end:
            raise TruncatedElement(f"need {n} bytes at offset {self.pos}, {self.remaining} left")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def skip(self, n: int) -> None:
        if self.pos + n > self.end:
            raise TruncatedElement(f"declared length {n} at offset {self.pos} exceeds data")
        self.pos += n

    def u16(self, endian: str) -> int:
        return struct.unpack(endian + "H", self.read(2))[0]

    def u32(self, endian: str) -> int:
        return struct.unpack(endian + "I", self.read(4))[0]

    def peek_u16(self, endian: str) -> int | None:
        if self.remaining < 2:
            return None
        return struct.unpack_from(endian + "H", self.data, self.pos)[0]

    def window(self, length: int) -> "_Reader":
        if self.pos + length > self.end:
            raise TruncatedElement(f"window of {length} at offset {self.pos} exceeds data")
        sub = _Reader(self.data, self.pos, self.pos + length)
        self.pos += length
        return sub


def _decode_value(vr: str, raw: bytes, endian: str, warnings: list[str], tag: DicomTag):
    if len(raw) == 0:
        return None
    if vr in STRING_VRS:
        try:
            text = raw.decode("ascii")
        except UnicodeDecodeError:
            text = raw.decode("latin-1")
            warnings.append(f"{tag}: non-ASCII bytes passed through verbatim")
        text = text.rstrip("\x00") if vr == "UI" else text.rstrip(" ")
        if vr in SINGLE_VALUE_TEXT_VRS:
            return [text]
        return text.split("\\")
    if vr in INT_VRS:
        size = _INT_SIZES[vr]
        if len(raw) % size:
            raise MalformedDataset(f"{tag}: {vr} payload of {len(raw)} bytes")
        return list(struct.unpack(f"{endian}{len(raw) // size}{_INT_FORMATS[vr]}", raw))
    if vr in FLOAT_VRS:
        size = 4 if vr == "FL" else 8
        if len(raw) % size:
            raise MalformedDataset(f"{tag}: {vr} payload of {len(raw)} bytes")
        return list(struct.unpack(f"{endian}{len(raw) // size}{_FLOAT_FORMATS[vr]}", raw))
    if vr == "AT":
        if len(raw) % 4:
            raise MalformedDataset(f"{tag}: AT payload of {len(raw)} bytes")
        shorts = struct.unpack(f"{endian}{len(raw) // 2}H", raw)
        return [DicomTag(shorts[i], shorts[i + 1]) for i in range(0, len(shorts), 2)]
    # OB/OW/OF/OD/OL/UN and anything unrecognized: keep raw payload
    return bytes(raw)


def _read_tag(reader: _Reader, endian: str) -> DicomTag:
    return DicomTag(reader.u16(endian), reader.u16(endian))


def _read_header(reader: _Reader, implicit: bool, endian: str) -> tuple[DicomTag, str, int]:
    tag = _read_tag(reader, endian)
    if tag in (tags.ITEM, tags.ITEM_DELIMITER, tags.SEQUENCE_DELIMITER):
        return tag, "", reader.u32(endian)
    if implicit:
        return tag, tags.lookup_vr(tag), reader.u32(endian)
    vr_bytes = reader.read(2)
    if not (b"AA" <= vr_bytes <= b"ZZ" and vr_bytes.isalpha()):
        raise MalformedDataset(f"invalid VR bytes {vr_bytes!r} for {tag}")
    vr = vr_bytes.decode("ascii")
    if vr in _LONG_FORM_VRS:
        reader.skip(2)
        return tag, vr, reader.u32(endian)
    return tag, vr, reader.u16(endian)


def _parse_sequence(reader: _Reader, length: int, implicit: bool, endian: str,
                    warnings: list[str], depth: int) -> list[dict[DicomTag, DataElement]]:
    if depth > MAX_SEQUENCE_DEPTH:
        raise MalformedDataset(f"sequence nesting deeper than {MAX_SEQUENCE_DEPTH}")
    items: list[dict[DicomTag, DataElement]] = []
    seq_reader = reader if length == UNDEFINED_LENGTH else reader.window(length)
    while True:
        if length != UNDEFINED_LENGTH and seq_reader.remaining == 0:
            break
        tag = _read_tag(seq_reader, endian)
        item_len = seq_reader.u32(endian)
        if tag == tags.SEQUENCE_DELIMITER:
            if length != UNDEFINED_LENGTH:
                raise MalformedDataset("sequence delimiter inside defined-length sequence")
            break
        if tag != tags.ITEM:
            raise MalformedDataset(f"expected sequence item, found {tag}")
        if item_len == UNDEFINED_LENGTH:
            items.append(_parse_dataset(seq_reader, implicit, endian, warnings,
                                        depth=depth, until_item_delimiter=True))
        else:
            items.append(_parse_dataset(seq_reader.window(item_len), implicit, endian,
                                        warnings, depth=depth))
    return items


def _skip_encapsulated_pixel(reader: _Reader, endian: str) -> None:
    # Basic-offset-table item plus fragments, closed by a sequence delimiter.
    while True:
        tag = _read_tag(reader, endian)
        length = reader.u32(endian)
        if tag == tags.SEQUENCE_DELIMITER:
            return
        if tag != tags.ITEM or length == UNDEFINED_LENGTH:
            raise MalformedDataset("broken encapsulated pixel structure")
        reader.skip(length)


def _parse_dataset(reader: _Reader, implicit: bool, endian: str, warnings: list[str],
                   depth: int = 0, until_item_delimiter: bool = False,
                   pixel_info: dict | None = None) -> dict[DicomTag, DataElement]:
    out: dict[DicomTag, DataElement] = {}
    while reader.remaining > 0:
        tag, vr, length = _read_header(reader, implicit, endian)
        if tag == tags.ITEM_DELIMITER:
            if until_item_delimiter:
                return out
            raise MalformedDataset("stray item delimiter")
        if tag in (tags.ITEM, tags.SEQUENCE_DELIMITER):
            raise MalformedDataset(f"stray delimiter {tag} in dataset")

        if tag == tags.PIXEL_DATA and depth == 0:
            if length == UNDEFINED_LENGTH:
                _skip_encapsulated_pixel(reader, endian)
                warnings.append("encapsulated pixel data: frames not servable")
                if pixel_info is not None:
                    pixel_info["encapsulated"] = True
            else:
                if pixel_info is not None:
                    pixel_info["offset"] = reader.pos
                    pixel_info["length"] = length
                reader.skip(length)
            out[tag] = DataElement(tag, vr or "OW", None)
            continue

        if vr == "SQ":
            value = _parse_sequence(reader, length, implicit, endian, warnings, depth + 1)
            out[tag] = DataElement(tag, vr, value)
            continue
        if length == UNDEFINED_LENGTH:
            if vr == "UN" or implicit:
                # Undefined-length UN payloads are encoded like implicit-VR sequences.
                value = _parse_sequence(reader, length, True, "<", warnings, depth + 1)
                out[tag] = DataElement(tag, "SQ" if implicit else vr, value)
                continue
            raise MalformedDataset(f"undefined length on non-sequence element {tag} ({vr})")

        raw = reader.read(length)
        out[tag] = DataElement(tag, vr, _decode_value(vr, raw, endian, warnings, tag))
    if until_item_delimiter:
        raise TruncatedElement("unterminated undefined-length item")
    return out


def _parse_file_meta(reader: _Reader, warnings: list[str]) -> dict[DicomTag, DataElement]:
    first = reader.peek_u16("<")
    if first != 0x0002:
        raise MalformedDataset("file meta group missing after DICM marker")
    tag, vr, length = _read_header(reader, implicit=False, endian="<")
    meta: dict[DicomTag, DataElement] = {}
    if tag == tags.FILE_META_GROUP_LENGTH:
        if vr != "UL" or length != 4:
            raise MalformedDataset("malformed file meta group length")
        group_len = struct.unpack("<I", reader.read(4))[0]
        meta[tag] = DataElement(tag, vr, [group_len])
        body = reader.window(group_len)
        parsed = _parse_dataset(body, implicit=False, endian="<", warnings=warnings)
    else:
        # Tolerate a missing group-length element: consume while still in group 0002.
        raw = reader.read(length)
        meta[tag] = DataElement(tag, vr, _decode_value(vr, raw, "<", warnings, tag))
        parsed = {}
        while reader.peek_u16("<") == 0x0002:
            t, v, ln = _read_header(reader, implicit=False, endian="<")
            parsed[t] = DataElement(t, v, _decode_value(v, reader.read(ln), "<", warnings, t))
    for t, elem in parsed.items():
        if t.group != 0x0002:
            raise MalformedDataset(f"non file-meta tag {t} inside meta group")
        meta[t] = elem
    return meta


def _build_pixel_locator(dataset: dict[DicomTag, DataElement], pixel_info: dict,
                         data_len: int, warnings: list[str]) -> PixelLocator | None:
    if "offset" not in pixel_info:
        return None

    def _int_of(tag: DicomTag, default: int | None = None) -> int | None:
        elem = dataset.get(tag)
        if elem is None or elem.value in (None, []):
            return default
        try:
            return int(elem.first())
        except (TypeError, ValueError):
            return default

    rows = _int_of(tags.ROWS, 0) or 0
    columns = _int_of(tags.COLUMNS, 0) or 0
    samples = _int_of(tags.SAMPLES_PER_PIXEL, 1) or 1
    bits = _int_of(tags.BITS_ALLOCATED, 8) or 8
    frames = _int_of(tags.NUMBER_OF_FRAMES, 1) or 1
    offset, length = pixel_info["offset"], pixel_info["length"]
    if offset + length > data_len:
        raise TruncatedElement("pixel payload extends past end of file")
    if frames < 1 or rows <= 0 or columns <= 0 or samples < 1 or bits % 8:
        warnings.append("pixel geometry attributes incomplete; frames not servable")
        return None
    frame_size = rows * columns * samples * (bits // 8)
    if frame_size * frames > length:
        warnings.append("pixel payload shorter than declared geometry; frames not servable")
        return None
    return PixelLocator(offset, length, frames, bits, rows, columns, samples)


def parse_part10(data: bytes) -> DicomObject:
    """Parse a complete Part-10 file image held in memory."""
    if len(data) < 132 or data[128:132] != b"DICM":
        raise InvalidPreamble("no DICM magic at offset 128")
    warnings: list[str] = []
    reader = _Reader(data, pos=132)
    meta = _parse_file_meta(reader, warnings)

    ts_elem = meta.get(tags.TRANSFER_SYNTAX_UID)
    if ts_elem is None or not ts_elem.first():
        raise MalformedDataset("file meta lacks a transfer syntax UID")
    transfer_syntax = str(ts_elem.first())

    implicit, endian, locator_valid = False, "<", True
    if transfer_syntax == tags.IMPLICIT_VR_LE:
        implicit = True
    elif transfer_syntax == tags.EXPLICIT_VR_LE:
        pass
    elif transfer_syntax == tags.EXPLICIT_VR_BE:
        endian = ">"
        warnings.append(f"unsupported transfer syntax {transfer_syntax}: stored only, frames not servable")
    elif transfer_syntax == tags.DEFLATED_EXPLICIT_VR_LE:
        try:
            inflated = zlib.decompressobj(-15).decompress(bytes(data[reader.pos:]))
        except zlib.error as exc:
            raise MalformedDataset(f"deflated dataset does not inflate: {exc}") from exc
        reader = _Reader(inflated)
        locator_valid = False
        warnings.append(f"unsupported transfer syntax {transfer_syntax}: stored only, frames not servable")
    else:
        # Encapsulated (compressed) syntaxes keep an explicit-VR LE dataset section.
        warnings.append(f"unsupported transfer syntax {transfer_syntax}: stored only, frames not servable")

    pixel_info: dict = {}
    dataset = _parse_dataset(reader, implicit, endian, warnings, pixel_info=pixel_info)
    locator = None
    if locator_valid:
        locator = _build_pixel_locator(dataset, pixel_info, len(data), warnings)
    elif "offset" in pixel_info:
        warnings.append("pixel locator unavailable for deflated dataset")
    return DicomObject(meta=meta, dataset=dataset, transfer_syntax=transfer_syntax,
                       pixel_locator=locator, warnings=warnings)
