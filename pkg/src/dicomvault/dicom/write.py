"""Dataset and Part-10 encoding (explicit/implicit VR little-endian).

Used by the synthetic corpus generator, by fixture builders, and for the
parse/serialize/parse round-trip checks.
"""

from __future__ import annotations

import struct

from . import tags
from .dataset import (
    FLOAT_VRS,
    INT_VRS,
    SINGLE_VALUE_TEXT_VRS,
    STRING_VRS,
    DataElement,
    DicomObject,
)
from .parse import UNDEFINED_LENGTH, _FLOAT_FORMATS, _INT_FORMATS, _LONG_FORM_VRS
from .tags import DicomTag

IMPLEMENTATION_UID = "2.25.4107127454918261799"


def _encode_value(elem: DataElement, endian: str) -> bytes:
    vr, value = elem.vr, elem.value
    if value is None or value == []:
        return b""
    if isinstance(value, bytes):
        return value + (b"\x00" if len(value) % 2 else b"")
    if vr in STRING_VRS:
        if vr in SINGLE_VALUE_TEXT_VRS:
            text = str(value[0]) if isinstance(value, list) else str(value)
        else:
            parts = value if isinstance(value, list) else [value]
            text = "\\".join(str(p) for p in parts)
        raw = text.encode("latin-1")
        if len(raw) % 2:
            raw += b"\x00" if vr == "UI" else b" "
        return raw
    if vr in INT_VRS:
        items = value if isinstance(value, list) else [value]
        return struct.pack(f"{endian}{len(items)}{_INT_FORMATS[vr]}", *items)
    if vr in FLOAT_VRS:
        items = value if isinstance(value, list) else [value]
        return struct.pack(f"{endian}{len(items)}{_FLOAT_FORMATS[vr]}", *items)
    if vr == "AT":
        items = value if isinstance(value, list) else [value]
        flat = [part for t in items for part in (t.group, t.element)]
        return struct.pack(f"{endian}{len(flat)}H", *flat)
    raise ValueError(f"cannot encode {vr} value {value!r}")


def _header(tag: DicomTag, vr: str, length: int, implicit: bool, endian: str) -> bytes:
    head = struct.pack(endian + "HH", tag.group, tag.element)
    if implicit:
        return head + struct.pack(endian + "I", length)
    if vr in _LONG_FORM_VRS:
        return head + vr.encode("ascii") + b"\x00\x00" + struct.pack(endian + "I", length)
    if length > 0xFFFF:
        raise ValueError(f"{tag} ({vr}): value of {length} bytes needs a long-form VR")
    return head + vr.encode("ascii") + struct.pack(endian + "H", length)


def _is_item_list(value) -> bool:
    return isinstance(value, list) and bool(value) and all(isinstance(v, dict) for v in value)


def encode_element(elem: DataElement, implicit: bool = False, endian: str = "<") -> bytes:
    if elem.vr == "SQ" or (elem.vr == "UN" and _is_item_list(elem.value)):
        item_implicit = implicit or elem.vr == "UN"
        item_endian = "<" if elem.vr == "UN" else endian
        body = bytearray()
        for item in elem.value or []:
            item_bytes = encode_dataset(item, item_implicit, item_endian)
            body += struct.pack(endian + "HHI", tags.ITEM.group, tags.ITEM.element, UNDEFINED_LENGTH)
            body += item_bytes
            body += struct.pack(endian + "HHI", tags.ITEM_DELIMITER.group, tags.ITEM_DELIMITER.element, 0)
        body += struct.pack(endian + "HHI", tags.SEQUENCE_DELIMITER.group, tags.SEQUENCE_DELIMITER.element, 0)
        return _header(elem.tag, elem.vr, UNDEFINED_LENGTH, implicit, endian) + bytes(body)
    payload = _encode_value(elem, endian)
    return _header(elem.tag, elem.vr, len(payload), implicit, endian) + payload


def encode_dataset(dataset: dict[DicomTag, DataElement] | list[DataElement],
                   implicit: bool = False, endian: str = "<") -> bytes:
    elems = list(dataset.values()) if isinstance(dataset, dict) else list(dataset)
    out = bytearray()
    for elem in sorted(elems, key=lambda e: e.tag):
        out += encode_element(elem, implicit, endian)
    return bytes(out)


def serialize_dataset(obj: DicomObject, pixel_source: bytes | None = None) -> bytes:
    """Re-encode a parsed dataset; pixel bytes are spliced back in via the locator."""
    implicit = obj.transfer_syntax == tags.IMPLICIT_VR_LE
    endian = ">" if obj.transfer_syntax == tags.EXPLICIT_VR_BE else "<"
    elems: list[DataElement] = []
    for tag, elem in obj.dataset.items():
        if tag == tags.PIXEL_DATA and elem.value is None:
            if obj.pixel_locator is None or pixel_source is None:
                raise ValueError("pixel payload unavailable for re-serialization")
            loc = obj.pixel_locator
            elems.append(DataElement(tag, elem.vr, pixel_source[loc.offset : loc.offset + loc.length]))
        else:
            elems.append(elem)
    return encode_dataset(elems, implicit, endian)


def rebuild_part10(obj: DicomObject, pixel_source: bytes | None = None) -> bytes:
    """Re-emit a parsed object as a Part-10 file, recomputing the meta group length."""
    meta_elems = [e for t, e in obj.meta.items() if t != tags.FILE_META_GROUP_LENGTH]
    meta_body = encode_dataset(meta_elems, implicit=False, endian="<")
    group_length = encode_element(
        DataElement(tags.FILE_META_GROUP_LENGTH, "UL", [len(meta_body)]), implicit=False
    )
    return b"\x00" * 128 + b"DICM" + group_length + meta_body + serialize_dataset(obj, pixel_source)


def build_part10(dataset: dict[DicomTag, DataElement] | list[DataElement],
                 transfer_syntax: str = tags.EXPLICIT_VR_LE,
                 sop_class_uid: str = tags.SECONDARY_CAPTURE_SOP_CLASS,
                 sop_instance_uid: str | None = None) -> bytes:
    """Assemble a full Part-10 file: preamble, DICM, group-0002 meta, dataset."""
    elems = list(dataset.values()) if isinstance(dataset, dict) else list(dataset)
    if sop_instance_uid is None:
        for elem in elems:
            if elem.tag == tags.SOP_INSTANCE_UID:
                sop_instance_uid = str(elem.first(""))
                break
        else:
            sop_instance_uid = "0"
    meta_elems = [
        DataElement(tags.FILE_META_VERSION, "OB", b"\x00\x01"),
        DataElement(tags.MEDIA_SOP_CLASS_UID, "UI", [sop_class_uid]),
        DataElement(tags.MEDIA_SOP_INSTANCE_UID, "UI", [sop_instance_uid]),
        DataElement(tags.TRANSFER_SYNTAX_UID, "UI", [transfer_syntax]),
        DataElement(tags.IMPLEMENTATION_CLASS_UID, "UI", [IMPLEMENTATION_UID]),
    ]
    meta_body = encode_dataset(meta_elems, implicit=False, endian="<")
    group_length = encode_element(
        DataElement(tags.FILE_META_GROUP_LENGTH, "UL", [len(meta_body)]), implicit=False
    )
    implicit = transfer_syntax == tags.IMPLICIT_VR_LE
    endian = ">" if transfer_syntax == tags.EXPLICIT_VR_BE else "<"
    body = encode_dataset(elems, implicit, endian)
    return b"\x00" * 128 + b"DICM" + group_length + meta_body + body
