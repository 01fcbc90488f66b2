"""Scenario files: what to drive, how often, against which user profile."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CorpusSpec, reference_buckets_with_total, scaled_reference_buckets

SERVICES = ("STOW", "QIDO", "WADO")
QIDO_LEVELS = ("PATIENT", "STUDY", "SERIES", "INSTANCE")


@dataclass
class UserProfile:
    username: str = "bench-user"
    password: str = "bench-pw"
    organization: str = "bench-org"
    facility_count: int = 5
    grant_recipe: list[str] = field(default_factory=lambda: ["ADD", "GET", "LIST"])
    scope: str = "OWN_FACILITIES"
    # extra randomly shaped grants (modality filters, validity windows) so the
    # authorization engine scans a realistic permission set per check
    random_permission_count: int = 0


@dataclass
class Scenario:
    name: str
    service: str                      # STOW | QIDO | WADO
    corpus: CorpusSpec
    corpus_dir: Path
    repetitions: int = 1
    rbac_mode: str = "both"           # "on" | "off" | "both"
    seed: int = 0
    warmup_requests: int = 20
    qido_levels: list[str] = field(default_factory=lambda: list(QIDO_LEVELS))
    wado_identifiers: int = 100
    user_profile: UserProfile = field(default_factory=UserProfile)
    admin_username: str = "admin"
    admin_password: str = "admin"
    concurrency: int = 1              # >1 leaves the sequential reference protocol

    def __post_init__(self):
        if self.service not in SERVICES:
            raise ValueError(f"service must be one of {SERVICES}, got {self.service!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.rbac_mode not in ("on", "off", "both"):
            raise ValueError("rbac_mode must be 'on', 'off', or 'both'")
        bad_levels = set(self.qido_levels) - set(QIDO_LEVELS)
        if bad_levels:
            raise ValueError(f"unknown QIDO levels {sorted(bad_levels)}")


def _corpus_spec_from(data: dict, seed: int) -> CorpusSpec:
    if "buckets" in data:
        buckets = [(int(b["count"]), int(b["size_kb"])) for b in data["buckets"]]
    elif "reference_scale" in data:
        buckets = scaled_reference_buckets(float(data["reference_scale"]))
    elif "reference_total" in data:
        buckets = reference_buckets_with_total(int(data["reference_total"]))
    else:
        raise ValueError("corpus needs buckets, reference_scale, or reference_total")
    return CorpusSpec(buckets=buckets, seed=int(data.get("seed", seed)))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    data = json.loads(path.read_text())
    seed = int(data.get("seed", 0))
    corpus_cfg = data.get("corpus", {"reference_scale": 0.01})
    corpus_dir = Path(corpus_cfg.get("dir", path.parent / f"corpus-{data.get('name', 'run')}"))
    if not corpus_dir.is_absolute():
        corpus_dir = path.parent / corpus_dir
    profile = UserProfile(**data.get("user_profile", {}))
    return Scenario(
        name=data.get("name", path.stem),
        service=data["service"].upper(),
        corpus=_corpus_spec_from(corpus_cfg, seed),
        corpus_dir=corpus_dir,
        repetitions=int(data.get("repetitions", 1)),
        rbac_mode=str(data.get("rbac_mode", "both")).lower(),
        seed=seed,
        warmup_requests=int(data.get("warmup_requests", 20)),
        qido_levels=[lvl.upper() for lvl in data.get("qido_levels", list(QIDO_LEVELS))],
        wado_identifiers=int(data.get("wado_identifiers", 100)),
        user_profile=profile,
        admin_username=data.get("admin", {}).get("username", "admin"),
        admin_password=data.get("admin", {}).get("password", "admin"),
        concurrency=int(data.get("concurrency", 1)),
    )
