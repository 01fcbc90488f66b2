"""Tag identities, the tag dictionary used for implicit-VR lookups, and keyword mapping."""

from __future__ import annotations

import re
from typing import NamedTuple


class DicomTag(NamedTuple):
    group: int
    element: int

    def __str__(self) -> str:
        return f"{self.group:04X}{self.element:04X}"

    @classmethod
    def parse(cls, text: str) -> "DicomTag":
        """Accepts GGGGEEEE or (GGGG,EEEE) renderings."""
        cleaned = text.strip().upper().replace("(", "").replace(")", "").replace(",", "")
        if not re.fullmatch(r"[0-9A-F]{8}", cleaned):
            raise ValueError(f"not a tag: {text!r}")
        return cls(int(cleaned[:4], 16), int(cleaned[4:], 16))


# Transfer syntaxes
IMPLICIT_VR_LE = "1.2.840.10008.1.2"
EXPLICIT_VR_LE = "1.2.840.10008.1.2.1"
DEFLATED_EXPLICIT_VR_LE = "1.2.840.10008.1.2.1.99"
EXPLICIT_VR_BE = "1.2.840.10008.1.2.2"

SECONDARY_CAPTURE_SOP_CLASS = "1.2.840.10008.5.1.4.1.1.7"

# Delimiter tags
ITEM = DicomTag(0xFFFE, 0xE000)
ITEM_DELIMITER = DicomTag(0xFFFE, 0xE00D)
SEQUENCE_DELIMITER = DicomTag(0xFFFE, 0xE0DD)

# File-meta tags (group 0002 is always explicit-VR little-endian)
FILE_META_GROUP_LENGTH = DicomTag(0x0002, 0x0000)
FILE_META_VERSION = DicomTag(0x0002, 0x0001)
MEDIA_SOP_CLASS_UID = DicomTag(0x0002, 0x0002)
MEDIA_SOP_INSTANCE_UID = DicomTag(0x0002, 0x0003)
TRANSFER_SYNTAX_UID = DicomTag(0x0002, 0x0010)
IMPLEMENTATION_CLASS_UID = DicomTag(0x0002, 0x0012)

# Dataset tags the archive and fixtures care about
SPECIFIC_CHARACTER_SET = DicomTag(0x0008, 0x0005)
SOP_CLASS_UID = DicomTag(0x0008, 0x0016)
SOP_INSTANCE_UID = DicomTag(0x0008, 0x0018)
STUDY_DATE = DicomTag(0x0008, 0x0020)
ACCESSION_NUMBER = DicomTag(0x0008, 0x0050)
MODALITY = DicomTag(0x0008, 0x0060)
REFERRING_PHYSICIAN = DicomTag(0x0008, 0x0090)
STUDY_DESCRIPTION = DicomTag(0x0008, 0x1030)
SERIES_DESCRIPTION = DicomTag(0x0008, 0x103E)
PATIENT_NAME = DicomTag(0x0010, 0x0010)
PATIENT_ID = DicomTag(0x0010, 0x0020)
PATIENT_BIRTH_DATE = DicomTag(0x0010, 0x0030)
PATIENT_SEX = DicomTag(0x0010, 0x0040)
STUDY_INSTANCE_UID = DicomTag(0x0020, 0x000D)
SERIES_INSTANCE_UID = DicomTag(0x0020, 0x000E)
STUDY_ID = DicomTag(0x0020, 0x0010)
SERIES_NUMBER = DicomTag(0x0020, 0x0011)
INSTANCE_NUMBER = DicomTag(0x0020, 0x0013)
SAMPLES_PER_PIXEL = DicomTag(0x0028, 0x0002)
PHOTOMETRIC_INTERPRETATION = DicomTag(0x0028, 0x0004)
NUMBER_OF_FRAMES = DicomTag(0x0028, 0x0008)
ROWS = DicomTag(0x0028, 0x0010)
COLUMNS = DicomTag(0x0028, 0x0011)
BITS_ALLOCATED = DicomTag(0x0028, 0x0100)
BITS_STORED = DicomTag(0x0028, 0x0101)
HIGH_BIT = DicomTag(0x0028, 0x0102)
PIXEL_REPRESENTATION = DicomTag(0x0028, 0x0103)
PIXEL_DATA = DicomTag(0x7FE0, 0x0010)

# (vr, keyword) per tag; consulted for implicit-VR datasets and keyword lookups.
TAG_DICTIONARY: dict[DicomTag, tuple[str, str]] = {
    FILE_META_GROUP_LENGTH: ("UL", "FileMetaInformationGroupLength"),
    FILE_META_VERSION: ("OB", "FileMetaInformationVersion"),
    MEDIA_SOP_CLASS_UID: ("UI", "MediaStorageSOPClassUID"),
    MEDIA_SOP_INSTANCE_UID: ("UI", "MediaStorageSOPInstanceUID"),
    TRANSFER_SYNTAX_UID: ("UI", "TransferSyntaxUID"),
    IMPLEMENTATION_CLASS_UID: ("UI", "ImplementationClassUID"),
    SPECIFIC_CHARACTER_SET: ("CS", "SpecificCharacterSet"),
    SOP_CLASS_UID: ("UI", "SOPClassUID"),
    SOP_INSTANCE_UID: ("UI", "SOPInstanceUID"),
    STUDY_DATE: ("DA", "StudyDate"),
    ACCESSION_NUMBER: ("SH", "AccessionNumber"),
    MODALITY: ("CS", "Modality"),
    REFERRING_PHYSICIAN: ("PN", "ReferringPhysicianName"),
    STUDY_DESCRIPTION: ("LO", "StudyDescription"),
    SERIES_DESCRIPTION: ("LO", "SeriesDescription"),
    PATIENT_NAME: ("PN", "PatientName"),
    PATIENT_ID: ("LO", "PatientID"),
    PATIENT_BIRTH_DATE: ("DA", "PatientBirthDate"),
    PATIENT_SEX: ("CS", "PatientSex"),
    STUDY_INSTANCE_UID: ("UI", "StudyInstanceUID"),
    SERIES_INSTANCE_UID: ("UI", "SeriesInstanceUID"),
    STUDY_ID: ("SH", "StudyID"),
    SERIES_NUMBER: ("IS", "SeriesNumber"),
    INSTANCE_NUMBER: ("IS", "InstanceNumber"),
    SAMPLES_PER_PIXEL: ("US", "SamplesPerPixel"),
    PHOTOMETRIC_INTERPRETATION: ("CS", "PhotometricInterpretation"),
    NUMBER_OF_FRAMES: ("IS", "NumberOfFrames"),
    ROWS: ("US", "Rows"),
    COLUMNS: ("US", "Columns"),
    BITS_ALLOCATED: ("US", "BitsAllocated"),
    BITS_STORED: ("US", "BitsStored"),
    HIGH_BIT: ("US", "HighBit"),
    PIXEL_REPRESENTATION: ("US", "PixelRepresentation"),
    PIXEL_DATA: ("OW", "PixelData"),
}

KEYWORD_TO_TAG: dict[str, DicomTag] = {kw: tag for tag, (_, kw) in TAG_DICTIONARY.items()}

_UID_RE = re.compile(r"^[0-9]+(\.[0-9]+)*$")


def lookup_vr(tag: DicomTag) -> str:
    """VR for implicit-VR decoding; unknown tags decode as UN blobs."""
    info = TAG_DICTIONARY.get(tag)
    return info[0] if info else "UN"


def keyword_of(tag: DicomTag) -> str | None:
    info = TAG_DICTIONARY.get(tag)
    return info[1] if info else None


def is_valid_uid(value: str) -> bool:
    return 0 < len(value) <= 64 and bool(_UID_RE.match(value))
