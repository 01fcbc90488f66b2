"""DICOM Part-10 parsing, JSON-model rendering, frame slicing, and encoding."""

from .dataset import DataElement, DicomObject, DimKeys, PixelLocator, extract_dim_keys
from .errors import (
    DicomError,
    FrameOutOfRange,
    InvalidPreamble,
    InvalidUid,
    MalformedDataset,
    MissingMandatoryAttribute,
    TruncatedElement,
    UnsupportedTransferSyntax,
)
from .frames import extract_frame
from .jsonmodel import dataset_to_json_dict, to_dicom_json
from .parse import parse_part10
from .tags import DicomTag
from .write import build_part10, encode_dataset, serialize_dataset

__all__ = [
    "DataElement",
    "DicomError",
    "DicomObject",
    "DicomTag",
    "DimKeys",
    "FrameOutOfRange",
    "InvalidPreamble",
    "InvalidUid",
    "MalformedDataset",
    "MissingMandatoryAttribute",
    "PixelLocator",
    "TruncatedElement",
    "UnsupportedTransferSyntax",
    "build_part10",
    "dataset_to_json_dict",
    "encode_dataset",
    "extract_dim_keys",
    "extract_frame",
    "parse_part10",
    "serialize_dataset",
    "to_dicom_json",
]
