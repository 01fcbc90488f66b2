"""Instance persistence, DIM-level indexing, and permission-filtered queries.

The LIST filter is pushed into the index scan as a grant join (role grants,
stow-time grants, shares), so the result set leaving the database is already
truncated to what the requesting user may see.
"""

from __future__ import annotations

import enum
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any

from ..db import Database
from ..dicom import DicomObject, extract_dim_keys
from ..dicom import parse_part10
from ..rbac import Category, Operation, RbacEngine, RbacStore, ResourceDescriptor, ResourceKind
from .errors import DuplicateSOPInstanceUID, Forbidden, MalformedQuery, NotFound, StorageFailure
from .storage import BlobStore
from ..dicom import tags as dtags

INDEX_SCHEMA = """
CREATE TABLE IF NOT EXISTS instances (
    sop_instance_uid TEXT PRIMARY KEY,
    study_uid TEXT NOT NULL,
    series_uid TEXT NOT NULL,
    patient_id TEXT NOT NULL DEFAULT '',
    modality TEXT NOT NULL DEFAULT '',
    study_date TEXT NOT NULL DEFAULT '',
    study_description TEXT NOT NULL DEFAULT '',
    series_number TEXT NOT NULL DEFAULT '',
    instance_number TEXT NOT NULL DEFAULT '',
    accession_number TEXT NOT NULL DEFAULT '',
    resource_id TEXT,
    storage_uri TEXT NOT NULL,
    size_bytes INTEGER NOT NULL,
    received_at REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_instances_study ON instances (study_uid);
CREATE INDEX IF NOT EXISTS idx_instances_series ON instances (study_uid, series_uid);
CREATE INDEX IF NOT EXISTS idx_instances_patient ON instances (patient_id);
"""

# keyword -> index column
INDEXED_ATTRIBUTES = {
    "PatientID": "patient_id",
    "StudyInstanceUID": "study_uid",
    "SeriesInstanceUID": "series_uid",
    "SOPInstanceUID": "sop_instance_uid",
    "Modality": "modality",
    "StudyDate": "study_date",
    "StudyDescription": "study_description",
    "SeriesNumber": "series_number",
    "InstanceNumber": "instance_number",
    "AccessionNumber": "accession_number",
}

# keyword -> (tag, vr) for response rows
ROW_ATTRIBUTES = {
    "PatientID": ("00100020", "LO"),
    "StudyInstanceUID": ("0020000D", "UI"),
    "SeriesInstanceUID": ("0020000E", "UI"),
    "SOPInstanceUID": ("00080018", "UI"),
    "Modality": ("00080060", "CS"),
    "StudyDate": ("00080020", "DA"),
    "StudyDescription": ("00081030", "LO"),
    "SeriesNumber": ("00200011", "IS"),
    "InstanceNumber": ("00200013", "IS"),
    "AccessionNumber": ("00080050", "SH"),
}
MODALITIES_IN_STUDY = ("00080061", "CS")


class QueryLevel(str, enum.Enum):
    PATIENT = "PATIENT"
    STUDY = "STUDY"
    SERIES = "SERIES"
    INSTANCE = "INSTANCE"


_LEVEL_ATTRIBUTES = {
    QueryLevel.PATIENT: ["PatientID"],
    QueryLevel.STUDY: ["StudyInstanceUID", "PatientID", "StudyDate", "StudyDescription",
                       "AccessionNumber"],
    QueryLevel.SERIES: ["StudyInstanceUID", "SeriesInstanceUID", "PatientID", "Modality",
                        "SeriesNumber"],
    QueryLevel.INSTANCE: list(ROW_ATTRIBUTES),
}

_LEVEL_KEYS = {
    QueryLevel.PATIENT: ("patient_id",),
    QueryLevel.STUDY: ("study_uid",),
    QueryLevel.SERIES: ("study_uid", "series_uid"),
    QueryLevel.INSTANCE: ("sop_instance_uid",),
}


@dataclass
class Query:
    level: QueryLevel
    filters: dict[str, str] = field(default_factory=dict)
    requested_attributes: set[str] | None = None
    offset: int = 0
    limit: int = 100


@dataclass
class QueryResult:
    rows: list[dict[str, Any]]
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class StoredInstance:
    sop_instance_uid: str
    storage_uri: str
    size_bytes: int
    received_at: float
    resource_id: str | None
    study_uid: str = ""
    series_uid: str = ""


_LIST_FILTER_SQL = """
i.resource_id IS NOT NULL
AND EXISTS (SELECT 1 FROM resources r WHERE r.id = i.resource_id AND r.deleted = 0)
AND (
  EXISTS (
    SELECT 1 FROM user_roles ur
    JOIN permissions p ON p.role_id = ur.role_id
    WHERE ur.user_id = :uid
      AND p.operation = 'LIST' AND p.category = 'RESOURCE'
      AND (p.valid_from IS NULL OR (p.valid_from <= :now AND :now < p.valid_to))
      AND (p.modalities IS NULL
           OR i.modality IN (SELECT je.value FROM json_each(p.modalities) je))
      AND (
        p.scope = 'GLOBAL'
        OR (p.scope = 'ORGANIZATION'
            AND (SELECT organization_id FROM resources r2 WHERE r2.id = i.resource_id)
               = (SELECT organization_id FROM users u WHERE u.id = :uid))
        OR (p.scope = 'OWN_FACILITIES' AND EXISTS (
              SELECT 1 FROM resource_facilities rf
              JOIN user_facilities uf ON uf.facility_id = rf.facility_id
              WHERE rf.resource_id = i.resource_id AND uf.user_id = :uid))
      )
  )
  OR EXISTS (
    SELECT 1 FROM resource_grants g
    WHERE g.resource_id = i.resource_id AND g.operation = 'LIST'
      AND ((g.subject_kind = 'USER' AND g.subject_id = :uid)
        OR (g.subject_kind = 'FACILITY' AND g.subject_id IN
              (SELECT facility_id FROM user_facilities WHERE user_id = :uid)))
  )
  OR EXISTS (
    SELECT 1 FROM shares s
    WHERE s.grantee_user_id = :uid AND s.resource_id = i.resource_id
      AND EXISTS (SELECT 1 FROM json_each(s.operations) jo WHERE jo.value = 'LIST')
      AND (s.valid_from IS NULL OR (s.valid_from <= :now AND :now < s.valid_to))
  )
)
"""


def _like_escape(prefix: str) -> str:
    return prefix.replace("\\", "\\\\").replace("%", "\\%").replace("_", "\\_")


class Archive:
    def __init__(self, db: Database, blobs: BlobStore, rbac_store: RbacStore,
                 engine: RbacEngine, max_limit: int = 5000):
        self.db = db
        self.blobs = blobs
        self.rbac = rbac_store
        self.engine = engine
        self.max_limit = max_limit
        self._stow_lock = threading.Lock()
        self.db.executescript(INDEX_SCHEMA)

    # -- storing --------------------------------------------------------

    def store_instance(self, obj: DicomObject, raw: bytes, acting_user_id: str | None,
                       now: float | None = None) -> StoredInstance:
        keys = extract_dim_keys(obj)
        received_at = time.time() if now is None else now
        with self._stow_lock:
            if self.db.one("SELECT 1 FROM instances WHERE sop_instance_uid = ?",
                           (keys.sop_instance_uid,)):
                raise DuplicateSOPInstanceUID(keys.sop_instance_uid)
            uri = self.blobs.uri_for(keys.study_uid, keys.series_uid, keys.sop_instance_uid)
            self.blobs.write(uri, raw)

            resource_id = None
            owner = self.rbac.get_user(acting_user_id) if acting_user_id else None
            try:
                with self.db.tx() as conn:
                    if owner is not None:
                        resource_id = uuid.uuid4().hex
                        conn.execute(
                            "INSERT INTO resources (id, kind, owner_user_id, organization_id,"
                            " modality, sop_instance_uid) VALUES (?, ?, ?, ?, ?, ?)",
                            (resource_id, ResourceKind.DICOM_INSTANCE.value, owner.id,
                             owner.organization_id, keys.modality, keys.sop_instance_uid))
                        for facility_id in owner.facility_ids:
                            conn.execute(
                                "INSERT INTO resource_facilities (resource_id, facility_id)"
                                " VALUES (?, ?)", (resource_id, facility_id))
                        for op in (Operation.GET, Operation.LIST):
                            conn.execute(
                                "INSERT OR IGNORE INTO resource_grants (id, resource_id,"
                                " subject_kind, subject_id, operation) VALUES (?, ?, ?, ?, ?)",
                                (uuid.uuid4().hex, resource_id, "USER", owner.id, op.value))
                            for facility_id in owner.facility_ids:
                                conn.execute(
                                    "INSERT OR IGNORE INTO resource_grants (id, resource_id,"
                                    " subject_kind, subject_id, operation) VALUES (?, ?, ?, ?, ?)",
                                    (uuid.uuid4().hex, resource_id, "FACILITY", facility_id, op.value))
                    conn.execute(
                        "INSERT INTO instances (sop_instance_uid, study_uid, series_uid,"
                        " patient_id, modality, study_date, study_description, series_number,"
                        " instance_number, accession_number, resource_id, storage_uri,"
                        " size_bytes, received_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                        (keys.sop_instance_uid, keys.study_uid, keys.series_uid, keys.patient_id,
                         keys.modality,
                         obj.string(dtags.STUDY_DATE), obj.string(dtags.STUDY_DESCRIPTION),
                         obj.string(dtags.SERIES_NUMBER), obj.string(dtags.INSTANCE_NUMBER),
                         obj.string(dtags.ACCESSION_NUMBER),
                         resource_id, uri, len(raw), received_at))
            except sqlite3.Error as exc:
                self.blobs.delete(uri)
                raise StorageFailure(str(exc)) from exc
            except Exception:
                self.blobs.delete(uri)
                raise
        return StoredInstance(keys.sop_instance_uid, uri, len(raw), received_at, resource_id,
                              keys.study_uid, keys.series_uid)

    # -- querying --------------------------------------------------------

    def _scan(self, q: Query, acting_user_id: str | None, now: float,
              enforce_permissions: bool, warnings: list[str]) -> list[sqlite3.Row]:
        clauses, params = [], {}
        for i, (keyword, value) in enumerate(sorted(q.filters.items())):
            column = INDEXED_ATTRIBUTES.get(keyword)
            if column is None:
                warnings.append(f"filter on non-indexed attribute {keyword}: no matches")
                return []
            key = f"f{i}"
            if value.endswith("*"):
                clauses.append(f"i.{column} LIKE :{key} ESCAPE '\\'")
                params[key] = _like_escape(value[:-1]) + "%"
            else:
                clauses.append(f"i.{column} = :{key}")
                params[key] = value
        if enforce_permissions:
            clauses.append(f"({_LIST_FILTER_SQL})")
            params["uid"] = acting_user_id or ""
            params["now"] = now
        sql = "SELECT i.* FROM instances i"
        if clauses:
            sql += " WHERE " + " AND ".join(clauses)
        sql += " ORDER BY i.sop_instance_uid"
        return self.db.query(sql, params)

    def query(self, q: Query, acting_user_id: str | None, now: float | None = None,
              enforce_permissions: bool = True) -> QueryResult:
        if not isinstance(q.level, QueryLevel):
            raise MalformedQuery(f"unknown level {q.level!r}")
        if q.offset < 0 or q.limit < 0:
            raise MalformedQuery("negative paging values")
        if q.limit > self.max_limit:
            raise MalformedQuery(f"limit {q.limit} above maximum {self.max_limit}")
        now = time.time() if now is None else now
        warnings: list[str] = []
        requested = set()
        for name in q.requested_attributes or ():
            if name in INDEXED_ATTRIBUTES:
                requested.add(name)
            else:
                warnings.append(f"requested attribute {name} is not indexed: omitted")

        instance_rows = self._scan(q, acting_user_id, now, enforce_permissions, warnings)
        groups: dict[tuple, list[sqlite3.Row]] = {}
        for row in instance_rows:
            key = tuple(row[c] for c in _LEVEL_KEYS[q.level])
            groups.setdefault(key, []).append(row)

        attributes = list(_LEVEL_ATTRIBUTES[q.level])
        attributes += [a for a in sorted(requested) if a not in attributes]
        out_rows = []
        for key in sorted(groups)[q.offset : q.offset + q.limit]:
            members = groups[key]
            head = members[0]
            row_json: dict[str, Any] = {}
            for keyword in attributes:
                tag, vr = ROW_ATTRIBUTES[keyword]
                value = head[INDEXED_ATTRIBUTES[keyword]]
                if value == "":
                    continue
                if vr == "IS":
                    try:
                        value = int(value)
                    except ValueError:
                        pass
                row_json[tag] = {"vr": vr, "Value": [value]}
            if q.level is QueryLevel.STUDY:
                modalities = sorted({m["modality"] for m in members if m["modality"]})
                if modalities:
                    tag, vr = MODALITIES_IN_STUDY
                    row_json[tag] = {"vr": vr, "Value": modalities}
            out_rows.append(row_json)
        return QueryResult(out_rows, warnings)

    # -- retrieval ---------------------------------------------------------

    def get_stored(self, sop_instance_uid: str) -> StoredInstance | None:
        row = self.db.one("SELECT * FROM instances WHERE sop_instance_uid = ?",
                          (sop_instance_uid,))
        if row is None:
            return None
        return StoredInstance(row["sop_instance_uid"], row["storage_uri"], row["size_bytes"],
                              row["received_at"], row["resource_id"],
                              row["study_uid"], row["series_uid"])

    def locate(self, sop_instance_uid: str, acting_user_id: str | None,
               now: float | None = None, enforce_permissions: bool = True
               ) -> tuple[StoredInstance, ResourceDescriptor | None]:
        stored = self.get_stored(sop_instance_uid)
        if stored is None:
            raise NotFound(sop_instance_uid)
        if not enforce_permissions:
            # open access never consults ownership; callers get the locator only
            return stored, None
        now = time.time() if now is None else now
        if stored.resource_id is None:
            raise Forbidden(f"instance {sop_instance_uid} has no ownership record")
        resource = self.rbac.get_resource(stored.resource_id)
        if resource is None:
            raise Forbidden(f"resource for {sop_instance_uid} is gone")
        decision = self.engine.authorize(acting_user_id or "", Operation.GET,
                                         Category.RESOURCE, resource, now)
        if not decision.allowed:
            raise Forbidden(f"GET denied: {decision.reason.value}")
        return stored, resource

    def read_bytes(self, stored: StoredInstance) -> bytes:
        return self.blobs.read(stored.storage_uri)

    # -- maintenance ---------------------------------------------------------

    def reindex(self) -> tuple[int, list[tuple[str, str]]]:
        """Rebuild the index from stored blobs; returns (records, failures)."""
        failures: list[tuple[str, str]] = []
        rebuilt = 0
        with self._stow_lock:
            with self.db.tx() as conn:
                conn.execute("DELETE FROM instances")
            for uri in self.blobs.scan():
                try:
                    raw = self.blobs.read(uri)
                    obj = parse_part10(raw)
                    keys = extract_dim_keys(obj)
                except Exception as exc:
                    failures.append((uri, f"{type(exc).__name__}: {exc}"))
                    continue
                resource = self.rbac.get_resource_by_sop(keys.sop_instance_uid)
                mtime = self.blobs.path_of(uri).stat().st_mtime
                with self.db.tx() as conn:
                    conn.execute(
                        "INSERT OR REPLACE INTO instances (sop_instance_uid, study_uid, series_uid,"
                        " patient_id, modality, study_date, study_description, series_number,"
                        " instance_number, accession_number, resource_id, storage_uri,"
                        " size_bytes, received_at) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                        (keys.sop_instance_uid, keys.study_uid, keys.series_uid, keys.patient_id,
                         keys.modality,
                         obj.string(dtags.STUDY_DATE), obj.string(dtags.STUDY_DESCRIPTION),
                         obj.string(dtags.SERIES_NUMBER), obj.string(dtags.INSTANCE_NUMBER),
                         obj.string(dtags.ACCESSION_NUMBER),
                         resource.resource_id if resource else None, uri, len(raw), mtime))
                rebuilt += 1
        return rebuilt, failures

    def reset(self) -> None:
        """Drop all instances, blobs, resources, grants, and shares (benchmark support)."""
        with self._stow_lock:
            with self.db.tx() as conn:
                conn.execute("DELETE FROM instances")
                conn.execute("DELETE FROM shares")
                conn.execute("DELETE FROM resource_grants")
                conn.execute("DELETE FROM resource_facilities")
                conn.execute("DELETE FROM resources")
            self.blobs.wipe()

    def instance_count(self) -> int:
        return self.db.scalar("SELECT COUNT(*) FROM instances")
