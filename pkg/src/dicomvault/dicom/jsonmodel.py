"""Rendering datasets in the DICOM JSON model (tag-keyed objects with vr/Value)."""

from __future__ import annotations

import base64
import json
from typing import Any

from . import tags
from .dataset import BINARY_VRS, DataElement, DicomObject
from .tags import DicomTag

_NUMERIC_STRING_VRS = {"IS", "DS"}


def _coerce_number(vr: str, value: str) -> Any:
    try:
        return int(value) if vr == "IS" else float(value)
    except (TypeError, ValueError):
        return value


def _element_to_json(elem: DataElement, warnings: list[str],
                     bulk_uri: str | None) -> dict[str, Any] | None:
    entry: dict[str, Any] = {"vr": elem.vr}
    value = elem.value
    if elem.tag == tags.PIXEL_DATA:
        entry["BulkDataURI"] = bulk_uri or "pixeldata"
        return entry
    if value is None or value == []:
        return entry
    if elem.vr == "SQ":
        entry["Value"] = [
            _dataset_to_json(item, warnings, bulk_uri) for item in value
        ]
    elif elem.vr == "PN":
        entry["Value"] = [{"Alphabetic": v} for v in value]
    elif elem.vr in _NUMERIC_STRING_VRS:
        entry["Value"] = [_coerce_number(elem.vr, v) for v in value]
    elif elem.vr == "AT":
        entry["Value"] = [str(t) for t in value]
    elif isinstance(value, bytes):
        if elem.vr in BINARY_VRS:
            entry["InlineBinary"] = base64.b64encode(value).decode("ascii")
        else:
            warnings.append(f"{elem.tag}: unsupported {elem.vr} payload omitted")
            return None
    else:
        entry["Value"] = list(value)
    return entry


def _dataset_to_json(dataset: dict[DicomTag, DataElement], warnings: list[str],
                     bulk_uri: str | None) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for tag in sorted(dataset):
        entry = _element_to_json(dataset[tag], warnings, bulk_uri)
        if entry is not None:
            out[str(tag)] = entry
    return out


def dataset_to_json_dict(obj: DicomObject, include_tags: set[DicomTag] | None = None,
                         bulk_uri: str | None = None) -> tuple[dict[str, Any], list[str]]:
    """JSON-model dict plus the list of lossy omissions."""
    warnings: list[str] = []
    dataset = obj.dataset
    if include_tags is not None:
        dataset = {t: e for t, e in dataset.items() if t in include_tags}
    return _dataset_to_json(dataset, warnings, bulk_uri), warnings


def to_dicom_json(obj: DicomObject, include_tags: set[DicomTag] | None = None,
                  bulk_uri: str | None = None) -> str:
    body, _ = dataset_to_json_dict(obj, include_tags, bulk_uri)
    return json.dumps(body)
