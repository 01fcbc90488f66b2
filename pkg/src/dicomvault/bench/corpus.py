"""Synthetic corpus generation: parseable files at controlled sizes.

Sizes are hit by padding the pixel payload; every generated file carries
unique UIDs and lands next to a manifest the load driver uses to build its
request plan.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from ..dicom import DataElement, build_part10
from ..dicom import tags as dtags

# (file count, size in KB) pairs of the reference corpus distribution
REFERENCE_DISTRIBUTION = [
    (2224, 131), (1120, 290), (960, 163), (417, 132),
    (368, 514), (352, 394), (156, 515), (78, 130),
]

MODALITY_CYCLE = ["CT", "MR", "CR", "US", "XA"]

_TILE = 65536


@dataclass(frozen=True)
class CorpusEntry:
    file: str
    sop: str
    study: str
    series: str
    patient: str
    modality: str
    size: int


@dataclass
class CorpusSpec:
    buckets: list[tuple[int, int]]  # (count, size_kb)
    seed: int = 0

    @property
    def total_files(self) -> int:
        return sum(count for count, _ in self.buckets)


def scaled_reference_buckets(scale: float) -> list[tuple[int, int]]:
    """Reference distribution with each bucket count scaled and rounded."""
    return [(round(count * scale), size) for count, size in REFERENCE_DISTRIBUTION]


def reference_buckets_with_total(total: int) -> list[tuple[int, int]]:
    """Largest-remainder apportionment of the reference distribution to an exact total."""
    grand = sum(count for count, _ in REFERENCE_DISTRIBUTION)
    exact = [(count * total / grand, size) for count, size in REFERENCE_DISTRIBUTION]
    floored = [(int(quota), size) for quota, size in exact]
    short = total - sum(count for count, _ in floored)
    remainders = sorted(range(len(exact)), key=lambda i: exact[i][0] - floored[i][0],
                        reverse=True)
    out = [list(pair) for pair in floored]
    for i in remainders[:short]:
        out[i][0] += 1
    return [(count, size) for count, size in out]


def _pixel_geometry(target_bytes: int, overhead: int) -> tuple[int, int]:
    columns = 64 if target_bytes < 16384 else 512
    wanted = max(columns, target_bytes - overhead)
    rows = max(1, round(wanted / columns))
    return rows, columns


def _tiled_bytes(rng: random.Random, length: int) -> bytes:
    tile = rng.randbytes(_TILE)
    return (tile * (length // _TILE + 1))[:length]


def generate_corpus(spec: CorpusSpec, out_dir: str | Path) -> list[CorpusEntry]:
    """Write the corpus files plus manifest.json; returns the manifest entries."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(spec.seed)
    root = f"2.25.{spec.seed % 10**9}"
    entries: list[CorpusEntry] = []
    counter = 0
    patient_id = ""
    study_uid = ""
    series_uid = ""
    series_modality = "CT"
    series_left = 0
    study_left = 0
    patient_left = 0

    sizes = [size_kb for count, size_kb in spec.buckets for _ in range(count)]
    rng.shuffle(sizes)
    for size_kb in sizes:
        if patient_left == 0:
            patient_left = rng.randint(4, 10)
            patient_id = f"BP{counter:06d}"
            study_left = 0
        if study_left == 0:
            study_left = rng.randint(2, 5)
            study_uid = f"{root}.1.{counter}"
            series_left = 0
        if series_left == 0:
            series_left = rng.randint(1, 4)
            series_uid = f"{root}.2.{counter}"
            series_modality = MODALITY_CYCLE[counter % len(MODALITY_CYCLE)]
        sop_uid = f"{root}.3.{counter}"
        counter += 1
        patient_left -= 1
        study_left -= 1
        series_left -= 1

        head = [
            DataElement(dtags.SOP_CLASS_UID, "UI", [dtags.SECONDARY_CAPTURE_SOP_CLASS]),
            DataElement(dtags.SOP_INSTANCE_UID, "UI", [sop_uid]),
            DataElement(dtags.STUDY_INSTANCE_UID, "UI", [study_uid]),
            DataElement(dtags.SERIES_INSTANCE_UID, "UI", [series_uid]),
            DataElement(dtags.PATIENT_ID, "LO", [patient_id]),
            DataElement(dtags.MODALITY, "CS", [series_modality]),
            DataElement(dtags.STUDY_DATE, "DA", [f"202003{counter % 28 + 1:02d}"]),
            DataElement(dtags.SAMPLES_PER_PIXEL, "US", [1]),
            DataElement(dtags.NUMBER_OF_FRAMES, "IS", ["1"]),
            DataElement(dtags.BITS_ALLOCATED, "US", [8]),
        ]
        # measure the pixel-free file to size the payload exactly
        overhead = len(build_part10(
            head + [DataElement(dtags.ROWS, "US", [1]), DataElement(dtags.COLUMNS, "US", [1])],
            sop_instance_uid=sop_uid)) + 12
        rows, columns = _pixel_geometry(size_kb * 1024, overhead)
        elements = head + [
            DataElement(dtags.ROWS, "US", [rows]),
            DataElement(dtags.COLUMNS, "US", [columns]),
            DataElement(dtags.PIXEL_DATA, "OB", _tiled_bytes(rng, rows * columns)),
        ]
        blob = build_part10(elements, sop_instance_uid=sop_uid)
        name = f"{counter - 1:06d}.dcm"
        (out / name).write_bytes(blob)
        entries.append(CorpusEntry(name, sop_uid, study_uid, series_uid, patient_id,
                                   series_modality, len(blob)))

    manifest = {"seed": spec.seed, "files": [entry.__dict__ for entry in entries]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return entries


def load_manifest(corpus_dir: str | Path) -> list[CorpusEntry]:
    data = json.loads((Path(corpus_dir) / "manifest.json").read_text())
    return [CorpusEntry(**entry) for entry in data["files"]]
