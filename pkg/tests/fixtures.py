"""Hand-packed Part-10 fixtures plus an independent reference scanner.

The fixture bytes are assembled here with raw struct packing, deliberately
sharing no code with the production encoder or parser. `reference_scan`
walks the same bytes with its own offset arithmetic and is used as the
cross-check oracle for parser assertions.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

LONG_VRS = ("OB", "OD", "OF", "OL", "OW", "SQ", "UC", "UN", "UR", "UT")

EXPLICIT_LE = "1.2.840.10008.1.2.1"
IMPLICIT_LE = "1.2.840.10008.1.2"
JPEG_LOSSLESS = "1.2.840.10008.1.2.4.70"


def el(group: int, elem: int, vr: str, payload: bytes) -> bytes:
    head = struct.pack("<HH", group, elem) + vr.encode("ascii")
    if vr in LONG_VRS:
        return head + b"\x00\x00" + struct.pack("<I", len(payload)) + payload
    return head + struct.pack("<H", len(payload)) + payload


def el_implicit(group: int, elem: int, payload: bytes) -> bytes:
    return struct.pack("<HHI", group, elem, len(payload)) + payload


def ui(value: str) -> bytes:
    raw = value.encode("ascii")
    return raw + (b"\x00" if len(raw) % 2 else b"")


def txt(value: str) -> bytes:
    raw = value.encode("latin-1")
    return raw + (b" " if len(raw) % 2 else b"")


def meta_group(transfer_syntax: str, sop_uid: str = "1.2.3.4") -> bytes:
    body = (
        el(0x0002, 0x0001, "OB", b"\x00\x01")
        + el(0x0002, 0x0002, "UI", ui("1.2.840.10008.5.1.4.1.1.7"))
        + el(0x0002, 0x0003, "UI", ui(sop_uid))
        + el(0x0002, 0x0010, "UI", ui(transfer_syntax))
    )
    return el(0x0002, 0x0000, "UL", struct.pack("<I", len(body))) + body


@dataclass
class Fixture:
    name: str
    data: bytes
    # absolute offsets where a truncated prefix is still a well-formed file
    clean_cut_offsets: set[int] = field(default_factory=set)
    pixel_payload_offset: int | None = None


def _assemble(name: str, transfer_syntax: str, dataset_elements: list[bytes],
              sop_uid: str = "1.2.3.4", pixel_element_index: int | None = None) -> Fixture:
    head = b"\x00" * 128 + b"DICM" + meta_group(transfer_syntax, sop_uid)
    cuts = {len(head)}
    data = bytearray(head)
    pixel_offset = None
    for i, chunk in enumerate(dataset_elements):
        if i == pixel_element_index:
            # payload begins after the 12-byte long-form header
            pixel_offset = len(data) + 12
        data += chunk
        cuts.add(len(data))
    cuts.discard(len(data))  # full file is not a truncation
    return Fixture(name, bytes(data), cuts, pixel_offset)


def explicit_patient_fixture() -> Fixture:
    """Explicit-VR LE, no pixel data; PatientID P1."""
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.3.4")),
        el(0x0008, 0x0020, "DA", txt("20200302")),
        el(0x0008, 0x0050, "SH", txt("ACC17")),
        el(0x0008, 0x0060, "CS", txt("CT")),
        el(0x0008, 0x1030, "LO", txt("Chest routine")),
        el(0x0010, 0x0010, "PN", txt("Doe^Jane")),
        el(0x0010, 0x0020, "LO", txt("P1")),
        el(0x0020, 0x000D, "UI", ui("1.2.3.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.3.2")),
        el(0x0020, 0x0011, "IS", txt("3")),
        el(0x0020, 0x0013, "IS", txt("7")),
    ]
    return _assemble("explicit_patient", EXPLICIT_LE, elements)


def explicit_no_modality_fixture() -> Fixture:
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.9.4")),
        el(0x0010, 0x0020, "LO", txt("P2")),
        el(0x0020, 0x000D, "UI", ui("1.2.9.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.9.2")),
    ]
    return _assemble("explicit_no_modality", EXPLICIT_LE, elements, sop_uid="1.2.9.4")


def multiframe_fixture() -> Fixture:
    """Two 4x4 8-bit single-sample frames: payload is bytes 0..31."""
    pixel = bytes(range(32))
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.5.4")),
        el(0x0008, 0x0060, "CS", txt("MR")),
        el(0x0010, 0x0020, "LO", txt("P3")),
        el(0x0020, 0x000D, "UI", ui("1.2.5.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.5.2")),
        el(0x0028, 0x0002, "US", struct.pack("<H", 1)),
        el(0x0028, 0x0008, "IS", txt("2")),
        el(0x0028, 0x0010, "US", struct.pack("<H", 4)),
        el(0x0028, 0x0011, "US", struct.pack("<H", 4)),
        el(0x0028, 0x0100, "US", struct.pack("<H", 8)),
        el(0x7FE0, 0x0010, "OB", pixel),
    ]
    return _assemble("multiframe", EXPLICIT_LE, elements, sop_uid="1.2.5.4",
                     pixel_element_index=len(elements) - 1)


def singleframe_fixture() -> Fixture:
    pixel = bytes(range(100, 116))
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.6.4")),
        el(0x0008, 0x0060, "CS", txt("CR")),
        el(0x0010, 0x0020, "LO", txt("P4")),
        el(0x0020, 0x000D, "UI", ui("1.2.6.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.6.2")),
        el(0x0028, 0x0002, "US", struct.pack("<H", 1)),
        el(0x0028, 0x0010, "US", struct.pack("<H", 4)),
        el(0x0028, 0x0011, "US", struct.pack("<H", 4)),
        el(0x0028, 0x0100, "US", struct.pack("<H", 8)),
        el(0x7FE0, 0x0010, "OB", pixel),
    ]
    return _assemble("singleframe", EXPLICIT_LE, elements, sop_uid="1.2.6.4",
                     pixel_element_index=len(elements) - 1)


def implicit_fixture() -> Fixture:
    elements = [
        el_implicit(0x0008, 0x0018, ui("1.2.7.4")),
        el_implicit(0x0008, 0x0060, txt("US")),
        el_implicit(0x0010, 0x0020, txt("P5")),
        el_implicit(0x0020, 0x000D, ui("1.2.7.1")),
        el_implicit(0x0020, 0x000E, ui("1.2.7.2")),
    ]
    return _assemble("implicit", IMPLICIT_LE, elements, sop_uid="1.2.7.4")


def sequence_fixture() -> Fixture:
    """Explicit LE with one undefined-length sequence of two items."""
    item1 = el(0x0008, 0x0060, "CS", txt("CT"))
    item2 = el(0x0008, 0x0060, "CS", txt("MR")) + el(0x0010, 0x0020, "LO", txt("P6"))
    seq_body = (
        struct.pack("<HHI", 0xFFFE, 0xE000, len(item1)) + item1
        + struct.pack("<HHI", 0xFFFE, 0xE000, 0xFFFFFFFF) + item2
        + struct.pack("<HHI", 0xFFFE, 0xE00D, 0)
        + struct.pack("<HHI", 0xFFFE, 0xE0DD, 0)
    )
    seq = (struct.pack("<HH", 0x0040, 0x0275) + b"SQ\x00\x00"
           + struct.pack("<I", 0xFFFFFFFF) + seq_body)
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.8.4")),
        el(0x0020, 0x000D, "UI", ui("1.2.8.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.8.2")),
        seq,
    ]
    return _assemble("sequence", EXPLICIT_LE, elements, sop_uid="1.2.8.4")


def encapsulated_fixture() -> Fixture:
    """Compressed transfer syntax: encapsulated pixel items survive parsing but serve no frames."""
    fragment = b"\xFE\xCA\xBE\xBA"
    pixel = (
        struct.pack("<HH", 0x7FE0, 0x0010) + b"OB\x00\x00" + struct.pack("<I", 0xFFFFFFFF)
        + struct.pack("<HHI", 0xFFFE, 0xE000, 0)                      # empty offset table
        + struct.pack("<HHI", 0xFFFE, 0xE000, len(fragment)) + fragment
        + struct.pack("<HHI", 0xFFFE, 0xE0DD, 0)
    )
    elements = [
        el(0x0008, 0x0018, "UI", ui("1.2.10.4")),
        el(0x0008, 0x0060, "CS", txt("XA")),
        el(0x0010, 0x0020, "LO", txt("P7")),
        el(0x0020, 0x000D, "UI", ui("1.2.10.1")),
        el(0x0020, 0x000E, "UI", ui("1.2.10.2")),
        pixel,
    ]
    return _assemble("encapsulated", JPEG_LOSSLESS, elements, sop_uid="1.2.10.4")


def all_fixtures() -> list[Fixture]:
    return [
        explicit_patient_fixture(),
        explicit_no_modality_fixture(),
        multiframe_fixture(),
        singleframe_fixture(),
        implicit_fixture(),
        sequence_fixture(),
        encapsulated_fixture(),
    ]


def reference_scan(data: bytes) -> dict[str, tuple[str, bytes]]:
    """Independent flat walk of an explicit-VR LE file: tag -> (vr, raw payload).

    Sequences and encapsulated payloads are skipped wholesale; this exists to
    cross-check tag/vr/payload extraction, not to mirror the full data model.
    """
    assert data[128:132] == b"DICM"
    out: dict[str, tuple[str, bytes]] = {}
    pos = 132
    while pos + 8 <= len(data):
        group, elem = struct.unpack_from("<HH", data, pos)
        vr = data[pos + 4 : pos + 6].decode("ascii", "replace")
        if vr in LONG_VRS:
            (length,) = struct.unpack_from("<I", data, pos + 8)
            payload_at = pos + 12
        else:
            (length,) = struct.unpack_from("<H", data, pos + 6)
            payload_at = pos + 8
        if length == 0xFFFFFFFF:
            break  # undefined-length structures are out of scope for the flat scan
        out[f"{group:04X}{elem:04X}"] = (vr, data[payload_at : payload_at + length])
        pos = payload_at + length
    return out
