"""In-memory dataset model and DIM key extraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from . import tags
from .errors import InvalidUid, MissingMandatoryAttribute
from .tags import DicomTag

# VRs whose decoded value is a list of strings
STRING_VRS = {"AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT", "PN", "SH", "ST", "TM", "UC", "UI", "UR", "UT"}
# String VRs that never hold multiple backslash-separated values
SINGLE_VALUE_TEXT_VRS = {"LT", "ST", "UT", "UR"}
INT_VRS = {"SL", "SS", "UL", "US"}
FLOAT_VRS = {"FD", "FL"}
BINARY_VRS = {"OB", "OD", "OF", "OL", "OW", "UN"}


@dataclass
class DataElement:
    tag: DicomTag
    vr: str
    # str/int/float list, raw bytes, list of item datasets (SQ), or None (empty / pixel placeholder)
    value: Any

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DataElement):
            return NotImplemented
        return (self.tag, self.vr, self.value) == (other.tag, other.vr, other.value)

    def first(self, default: Any = None) -> Any:
        if isinstance(self.value, list) and self.value:
            return self.value[0]
        if isinstance(self.value, (str, int, float, bytes)):
            return self.value
        return default


@dataclass
class PixelLocator:
    """Position of the raw pixel payload inside the original file; the bytes are never copied."""

    offset: int
    length: int
    frame_count: int
    bits_allocated: int
    rows: int
    columns: int
    samples_per_pixel: int

    @property
    def frame_size(self) -> int:
        return self.rows * self.columns * self.samples_per_pixel * (self.bits_allocated // 8)


@dataclass
class DicomObject:
    meta: dict[DicomTag, DataElement]
    dataset: dict[DicomTag, DataElement]
    transfer_syntax: str
    pixel_locator: PixelLocator | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def frame_servable(self) -> bool:
        return (
            self.pixel_locator is not None
            and self.transfer_syntax in (tags.IMPLICIT_VR_LE, tags.EXPLICIT_VR_LE)
        )

    def get(self, tag: DicomTag) -> DataElement | None:
        return self.dataset.get(tag)

    def string(self, tag: DicomTag, default: str = "") -> str:
        elem = self.dataset.get(tag)
        if elem is None:
            return default
        value = elem.first()
        return default if value is None else str(value)


@dataclass(frozen=True)
class DimKeys:
    """Patient/Study/Series/Instance hierarchy keys plus modality."""

    patient_id: str
    study_uid: str
    series_uid: str
    sop_instance_uid: str
    modality: str


def extract_dim_keys(obj: DicomObject) -> DimKeys:
    """Pull the five queryable keys; the three UIDs are mandatory and validated."""
    uids = {}
    for tag in (tags.STUDY_INSTANCE_UID, tags.SERIES_INSTANCE_UID, tags.SOP_INSTANCE_UID):
        elem = obj.dataset.get(tag)
        value = elem.first() if elem is not None else None
        if not value:
            raise MissingMandatoryAttribute(tag)
        value = str(value)
        if not tags.is_valid_uid(value):
            raise InvalidUid(f"{tag}: {value!r}")
        uids[tag] = value
    return DimKeys(
        patient_id=obj.string(tags.PATIENT_ID),
        study_uid=uids[tags.STUDY_INSTANCE_UID],
        series_uid=uids[tags.SERIES_INSTANCE_UID],
        sop_instance_uid=uids[tags.SOP_INSTANCE_UID],
        modality=obj.string(tags.MODALITY),
    )
