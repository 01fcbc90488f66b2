"""Round-trip and truncation-robustness properties of the Part-10 codec."""

import pytest
from hypothesis import given, settings, strategies as st

from dicomvault.dicom import (
    DataElement,
    DicomError,
    DicomTag,
    build_part10,
    parse_part10,
)
from dicomvault.dicom.write import rebuild_part10

import fixtures as fx


SUPPORTED = [f for f in fx.all_fixtures() if f.name != "encapsulated"]


@pytest.mark.parametrize("fixture", SUPPORTED, ids=lambda f: f.name)
def test_parse_serialize_parse_identity(fixture):
    first = parse_part10(fixture.data)
    rebuilt = rebuild_part10(first, pixel_source=fixture.data)
    second = parse_part10(rebuilt)
    assert second.dataset == first.dataset
    assert second.transfer_syntax == first.transfer_syntax
    if first.pixel_locator is None:
        assert second.pixel_locator is None
    else:
        assert second.pixel_locator.length == first.pixel_locator.length
        assert second.pixel_locator.frame_count == first.pixel_locator.frame_count


@pytest.mark.parametrize("fixture", fx.all_fixtures(), ids=lambda f: f.name)
def test_every_truncation_fails_cleanly(fixture):
    """Prefixes cut inside any structure raise a structured error; cuts exactly
    on a top-level element boundary are complete files and parse cleanly."""
    data = fixture.data
    for cut in range(len(data)):
        if cut in fixture.clean_cut_offsets:
            parse_part10(data[:cut])  # must not raise
            continue
        with pytest.raises(DicomError):
            parse_part10(data[:cut])


_TEXT = st.text(alphabet=st.characters(min_codepoint=0x20, max_codepoint=0x7E), min_size=1, max_size=12)
_TEXT_CLEAN = _TEXT.map(lambda s: s.replace("\\", "/").rstrip(" "))


def _string_elements():
    return st.builds(
        lambda t, vals: DataElement(DicomTag(0x0009, 0x1000 + t), "LO", vals),
        st.integers(min_value=0, max_value=200),
        st.lists(_TEXT_CLEAN, min_size=1, max_size=3),
    )


def _int_elements():
    return st.builds(
        lambda t, vals: DataElement(DicomTag(0x0009, 0x2000 + t), "US", vals),
        st.integers(min_value=0, max_value=200),
        st.lists(st.integers(min_value=0, max_value=0xFFFF), min_size=1, max_size=4),
    )


def _float_elements():
    finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
    return st.builds(
        lambda t, vals: DataElement(DicomTag(0x0009, 0x3000 + t), "FD", vals),
        st.integers(min_value=0, max_value=200),
        st.lists(finite, min_size=1, max_size=3),
    )


@settings(max_examples=150, deadline=None)
@given(st.lists(st.one_of(_string_elements(), _int_elements(), _float_elements()),
                min_size=0, max_size=12, unique_by=lambda e: e.tag))
def test_generated_datasets_round_trip(elements):
    data = build_part10(elements, sop_instance_uid="1.2.3.99")
    parsed = parse_part10(data)
    for elem in elements:
        assert parsed.dataset[elem.tag] == elem


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(_string_elements(), _int_elements()),
                min_size=1, max_size=6, unique_by=lambda e: e.tag),
       st.data())
def test_generated_truncations_never_crash(elements, data):
    blob = build_part10(elements, sop_instance_uid="1.2.3.99")
    cut = data.draw(st.integers(min_value=0, max_value=len(blob) - 1))
    try:
        parse_part10(blob[:cut])
    except DicomError:
        pass  # structured failure is the contract; anything else propagates
