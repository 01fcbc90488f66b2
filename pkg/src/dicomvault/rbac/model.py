"""Access-control domain types: principals, grants, shares, decisions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Operation(str, enum.Enum):
    GET = "GET"
    ADD = "ADD"
    LIST = "LIST"
    SHARE = "SHARE"
    UPDATE = "UPDATE"
    DELETE = "DELETE"


# Accepted at the management boundary only; normalized before storage.
OPERATION_ALIASES: dict[str, tuple[Operation, ...]] = {
    "READ": (Operation.GET,),
    "CREATE": (Operation.ADD,),
    "WRITE": (Operation.ADD, Operation.UPDATE),
}


def normalize_operation(name: str) -> tuple[Operation, ...]:
    upper = name.strip().upper()
    if upper in OPERATION_ALIASES:
        return OPERATION_ALIASES[upper]
    return (Operation(upper),)


class Category(str, enum.Enum):
    RESOURCE = "RESOURCE"
    USER = "USER"
    ROLE = "ROLE"
    FACILITY = "FACILITY"
    ORGANIZATION = "ORGANIZATION"
    AUDIT = "AUDIT"


class Scope(str, enum.Enum):
    OWN_FACILITIES = "OWN_FACILITIES"
    ORGANIZATION = "ORGANIZATION"
    GLOBAL = "GLOBAL"


SHAREABLE_OPERATIONS = frozenset({Operation.GET, Operation.LIST, Operation.SHARE})


class ResourceKind(str, enum.Enum):
    DICOM_INSTANCE = "DICOM_INSTANCE"
    DICOM_SERIES = "DICOM_SERIES"
    DICOM_STUDY = "DICOM_STUDY"
    DICOM_PATIENT = "DICOM_PATIENT"


@dataclass(frozen=True)
class Organization:
    id: str
    name: str


@dataclass(frozen=True)
class Facility:
    id: str
    organization_id: str
    name: str


@dataclass(frozen=True)
class User:
    id: str
    username: str
    email: str
    organization_id: str
    facility_ids: frozenset[str] = field(default_factory=frozenset)
    role_ids: frozenset[str] = field(default_factory=frozenset)
    deleted: bool = False


@dataclass(frozen=True)
class Role:
    id: str
    organization_id: str
    name: str


@dataclass(frozen=True)
class Permission:
    id: str
    operation: Operation
    category: Category
    scope: Scope
    modality_filter: frozenset[str] | None = None
    validity: tuple[float, float] | None = None


@dataclass(frozen=True)
class ResourceDescriptor:
    resource_id: str
    kind: ResourceKind
    owner_user_id: str
    organization_id: str
    facility_ids: frozenset[str]
    modality: str = ""
    sop_instance_uid: str | None = None


@dataclass(frozen=True)
class ResourceGrant:
    """GET/LIST access materialized at store time for the owner and owning facilities."""

    id: str
    resource_id: str
    subject_kind: str  # USER | FACILITY
    subject_id: str
    operation: Operation


@dataclass(frozen=True)
class Share:
    id: str
    grantor_user_id: str
    grantee_user_id: str
    resource_id: str
    operations: frozenset[Operation]
    validity: tuple[float, float] | None = None


class DecisionReason(str, enum.Enum):
    ROLE_GRANT = "ROLE_GRANT"
    SHARE_GRANT = "SHARE_GRANT"
    DENY_DEFAULT = "DENY_DEFAULT"
    DENY_EXPIRED = "DENY_EXPIRED"
    DENY_SCOPE = "DENY_SCOPE"
    DENY_MODALITY = "DENY_MODALITY"


# Most specific deny wins when several grants fail for different reasons.
DENY_RANK = {
    DecisionReason.DENY_DEFAULT: 0,
    DecisionReason.DENY_SCOPE: 1,
    DecisionReason.DENY_MODALITY: 2,
    DecisionReason.DENY_EXPIRED: 3,
}


@dataclass(frozen=True)
class Decision:
    allowed: bool
    reason: DecisionReason
    matched_grant_id: str | None = None


def window_contains(validity: tuple[float, float] | None, now: float) -> bool:
    if validity is None:
        return True
    start, end = validity
    return start <= now < end
