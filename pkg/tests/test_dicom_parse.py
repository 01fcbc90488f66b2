import pytest

from dicomvault.dicom import (
    DicomTag,
    InvalidPreamble,
    InvalidUid,
    MalformedDataset,
    MissingMandatoryAttribute,
    extract_dim_keys,
    parse_part10,
)
from dicomvault.dicom import tags

import fixtures as fx


def test_invalid_preamble_zeros_then_junk():
    data = b"\x00" * 128 + b"XXXX"
    with pytest.raises(InvalidPreamble):
        parse_part10(data)


def test_short_file_is_invalid_preamble():
    with pytest.raises(InvalidPreamble):
        parse_part10(b"\x00" * 50)


def test_explicit_fixture_patient_id():
    obj = parse_part10(fx.explicit_patient_fixture().data)
    elem = obj.dataset[tags.PATIENT_ID]
    assert elem.vr == "LO"
    assert elem.value == ["P1"]


def test_transfer_syntax_copied_from_meta():
    obj = parse_part10(fx.explicit_patient_fixture().data)
    assert obj.transfer_syntax == "1.2.840.10008.1.2.1"
    assert obj.meta[tags.TRANSFER_SYNTAX_UID].value == ["1.2.840.10008.1.2.1"]


def test_matches_reference_scan():
    fixture = fx.explicit_patient_fixture()
    obj = parse_part10(fixture.data)
    reference = fx.reference_scan(fixture.data)
    for key, (vr, raw) in reference.items():
        tag = DicomTag.parse(key)
        if tag.group == 0x0002:
            parsed = obj.meta[tag]
        else:
            parsed = obj.dataset[tag]
        assert parsed.vr == vr
        if vr in ("LO", "SH", "CS", "DA", "PN", "IS"):
            assert parsed.value == [raw.decode("ascii").rstrip(" ")]
        elif vr == "UI":
            assert parsed.value == [raw.decode("ascii").rstrip("\x00")]


def test_trailing_padding_stripped_per_vr():
    obj = parse_part10(fx.explicit_patient_fixture().data)
    # odd-length source values were padded in the fixture builder
    assert obj.dataset[tags.STUDY_DESCRIPTION].value == ["Chest routine"]
    assert obj.dataset[tags.STUDY_INSTANCE_UID].value == ["1.2.3.1"]


def test_implicit_dataset_parses_with_dictionary_vrs():
    obj = parse_part10(fx.implicit_fixture().data)
    assert obj.transfer_syntax == "1.2.840.10008.1.2"
    assert obj.dataset[tags.PATIENT_ID].value == ["P5"]
    assert obj.dataset[tags.PATIENT_ID].vr == "LO"
    assert obj.dataset[tags.MODALITY].value == ["US"]


def test_sequence_items_parse_nested():
    obj = parse_part10(fx.sequence_fixture().data)
    seq = obj.dataset[DicomTag(0x0040, 0x0275)]
    assert seq.vr == "SQ"
    assert len(seq.value) == 2
    assert seq.value[0][tags.MODALITY].value == ["CT"]
    assert seq.value[1][tags.PATIENT_ID].value == ["P6"]


def test_encapsulated_pixel_flagged_not_fatal():
    obj = parse_part10(fx.encapsulated_fixture().data)
    assert obj.pixel_locator is None
    assert not obj.frame_servable
    assert any("not servable" in w for w in obj.warnings)
    assert obj.dataset[tags.PIXEL_DATA].value is None


def test_pixel_locator_records_span_without_copying():
    fixture = fx.multiframe_fixture()
    obj = parse_part10(fixture.data)
    loc = obj.pixel_locator
    assert loc is not None
    assert loc.offset == fixture.pixel_payload_offset
    assert loc.length == 32
    assert loc.frame_count == 2
    assert loc.frame_size == 16
    assert obj.dataset[tags.PIXEL_DATA].value is None


def test_nesting_beyond_depth_limit_rejected():
    inner = fx.el(0x0008, 0x0060, "CS", fx.txt("CT"))
    for _ in range(18):
        item = (b"\xFE\xFF\x00\xE0" + len(inner).to_bytes(4, "little")) + inner
        inner = (b"\x40\x00\x75\x02" + b"SQ\x00\x00"
                 + len(item).to_bytes(4, "little") + item)
    data = (b"\x00" * 128 + b"DICM" + fx.meta_group(fx.EXPLICIT_LE) + inner)
    with pytest.raises(MalformedDataset):
        parse_part10(data)


def test_dim_keys_all_attributes():
    obj = parse_part10(fx.explicit_patient_fixture().data)
    keys = extract_dim_keys(obj)
    assert keys.patient_id == "P1"
    assert keys.study_uid == "1.2.3.1"
    assert keys.series_uid == "1.2.3.2"
    assert keys.sop_instance_uid == "1.2.3.4"
    assert keys.modality == "CT"


def test_dim_keys_missing_modality_is_empty():
    obj = parse_part10(fx.explicit_no_modality_fixture().data)
    assert extract_dim_keys(obj).modality == ""


def test_dim_keys_missing_sop_uid_raises():
    elements = [
        fx.el(0x0020, 0x000D, "UI", fx.ui("1.2.3.1")),
        fx.el(0x0020, 0x000E, "UI", fx.ui("1.2.3.2")),
    ]
    data = b"\x00" * 128 + b"DICM" + fx.meta_group(fx.EXPLICIT_LE) + b"".join(elements)
    obj = parse_part10(data)
    with pytest.raises(MissingMandatoryAttribute) as err:
        extract_dim_keys(obj)
    assert err.value.tag == tags.SOP_INSTANCE_UID


def test_dim_keys_reject_malformed_uid():
    elements = [
        fx.el(0x0008, 0x0018, "UI", fx.ui("1.2.3.4")),
        fx.el(0x0020, 0x000D, "UI", fx.txt("..evil/path")),
        fx.el(0x0020, 0x000E, "UI", fx.ui("1.2.3.2")),
    ]
    data = b"\x00" * 128 + b"DICM" + fx.meta_group(fx.EXPLICIT_LE) + b"".join(elements)
    with pytest.raises(InvalidUid):
        extract_dim_keys(parse_part10(data))


def test_non_ascii_string_passes_through_with_warning():
    element = fx.el(0x0010, 0x0010, "PN", b"M\xfcller ")
    data = b"\x00" * 128 + b"DICM" + fx.meta_group(fx.EXPLICIT_LE) + element
    obj = parse_part10(data)
    assert obj.dataset[tags.PATIENT_NAME].value == ["Müller"]
    assert any("non-ASCII" in w for w in obj.warnings)
