"""SQLite-backed entity store for principals, grants, resources, and shares.

Mutations run in single transactions on the shared connection, so every
grant or revocation is visible to the next authorization check with no
caching layer in between.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import uuid

from ..db import Database
from .errors import (
    DuplicateEntity,
    DuplicateResource,
    InvalidValidityWindow,
    InvariantViolation,
    ReferencedEntity,
    UnknownEntity,
    UnknownGrant,
    UnknownResource,
    UnknownRole,
    UnknownUser,
)
from .model import (
    Category,
    Facility,
    Operation,
    Organization,
    Permission,
    ResourceDescriptor,
    ResourceGrant,
    ResourceKind,
    Role,
    Scope,
    Share,
    SHAREABLE_OPERATIONS,
    User,
)

_PBKDF2_ITERATIONS = 50_000

SCHEMA = """
CREATE TABLE IF NOT EXISTS organizations (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS facilities (
    id TEXT PRIMARY KEY,
    organization_id TEXT NOT NULL REFERENCES organizations(id),
    name TEXT NOT NULL,
    UNIQUE (organization_id, name)
);
CREATE TABLE IF NOT EXISTS users (
    id TEXT PRIMARY KEY,
    username TEXT NOT NULL UNIQUE,
    email TEXT NOT NULL DEFAULT '',
    password_salt BLOB NOT NULL,
    password_hash BLOB NOT NULL,
    organization_id TEXT NOT NULL REFERENCES organizations(id),
    deleted INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS user_facilities (
    user_id TEXT NOT NULL REFERENCES users(id),
    facility_id TEXT NOT NULL REFERENCES facilities(id),
    PRIMARY KEY (user_id, facility_id)
);
CREATE TABLE IF NOT EXISTS roles (
    id TEXT PRIMARY KEY,
    organization_id TEXT NOT NULL REFERENCES organizations(id),
    name TEXT NOT NULL,
    UNIQUE (organization_id, name)
);
CREATE TABLE IF NOT EXISTS user_roles (
    user_id TEXT NOT NULL REFERENCES users(id),
    role_id TEXT NOT NULL REFERENCES roles(id),
    PRIMARY KEY (user_id, role_id)
);
CREATE TABLE IF NOT EXISTS permissions (
    id TEXT PRIMARY KEY,
    role_id TEXT NOT NULL REFERENCES roles(id),
    operation TEXT NOT NULL,
    category TEXT NOT NULL,
    scope TEXT NOT NULL,
    modalities TEXT,
    valid_from REAL,
    valid_to REAL
);
CREATE TABLE IF NOT EXISTS resources (
    id TEXT PRIMARY KEY,
    kind TEXT NOT NULL,
    owner_user_id TEXT NOT NULL,
    organization_id TEXT NOT NULL REFERENCES organizations(id),
    modality TEXT NOT NULL DEFAULT '',
    sop_instance_uid TEXT UNIQUE,
    deleted INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS resource_facilities (
    resource_id TEXT NOT NULL REFERENCES resources(id),
    facility_id TEXT NOT NULL REFERENCES facilities(id),
    PRIMARY KEY (resource_id, facility_id)
);
CREATE TABLE IF NOT EXISTS resource_grants (
    id TEXT PRIMARY KEY,
    resource_id TEXT NOT NULL REFERENCES resources(id),
    subject_kind TEXT NOT NULL CHECK (subject_kind IN ('USER', 'FACILITY')),
    subject_id TEXT NOT NULL,
    operation TEXT NOT NULL,
    UNIQUE (resource_id, subject_kind, subject_id, operation)
);
CREATE TABLE IF NOT EXISTS shares (
    id TEXT PRIMARY KEY,
    grantor_user_id TEXT NOT NULL REFERENCES users(id),
    grantee_user_id TEXT NOT NULL REFERENCES users(id),
    resource_id TEXT NOT NULL REFERENCES resources(id),
    operations TEXT NOT NULL,
    valid_from REAL,
    valid_to REAL
);
"""


def _new_id() -> str:
    return uuid.uuid4().hex


def _check_window(validity: tuple[float, float] | None) -> tuple[float | None, float | None]:
    if validity is None:
        return None, None
    start, end = float(validity[0]), float(validity[1])
    if not start < end:
        raise InvalidValidityWindow(f"start {start} not before end {end}")
    return start, end


def _row_window(row) -> tuple[float, float] | None:
    if row["valid_from"] is None:
        return None
    return (row["valid_from"], row["valid_to"])


class RbacStore:
    def __init__(self, db: Database):
        self.db = db
        self.db.executescript(SCHEMA)

    # -- organizations -------------------------------------------------

    def create_organization(self, name: str) -> Organization:
        if self.db.one("SELECT 1 FROM organizations WHERE name = ?", (name,)):
            raise DuplicateEntity(f"organization name {name!r}")
        org = Organization(_new_id(), name)
        with self.db.tx() as conn:
            conn.execute("INSERT INTO organizations (id, name) VALUES (?, ?)", (org.id, org.name))
        return org

    def get_organization(self, org_id: str) -> Organization | None:
        row = self.db.one("SELECT * FROM organizations WHERE id = ?", (org_id,))
        return Organization(row["id"], row["name"]) if row else None

    def list_organizations(self) -> list[Organization]:
        rows = self.db.query("SELECT * FROM organizations ORDER BY name")
        return [Organization(r["id"], r["name"]) for r in rows]

    def update_organization(self, org_id: str, name: str) -> Organization:
        if not self.get_organization(org_id):
            raise UnknownEntity(f"organization {org_id}")
        clash = self.db.one("SELECT id FROM organizations WHERE name = ? AND id != ?", (name, org_id))
        if clash:
            raise DuplicateEntity(f"organization name {name!r}")
        with self.db.tx() as conn:
            conn.execute("UPDATE organizations SET name = ? WHERE id = ?", (name, org_id))
        return Organization(org_id, name)

    def delete_organization(self, org_id: str) -> None:
        if not self.get_organization(org_id):
            raise UnknownEntity(f"organization {org_id}")
        for table in ("facilities", "users", "roles", "resources"):
            if self.db.one(f"SELECT 1 FROM {table} WHERE organization_id = ? LIMIT 1", (org_id,)):
                raise ReferencedEntity(f"organization {org_id} still referenced by {table}")
        with self.db.tx() as conn:
            conn.execute("DELETE FROM organizations WHERE id = ?", (org_id,))

    # -- facilities ----------------------------------------------------

    def create_facility(self, organization_id: str, name: str) -> Facility:
        if not self.get_organization(organization_id):
            raise UnknownEntity(f"organization {organization_id}")
        if self.db.one("SELECT 1 FROM facilities WHERE organization_id = ? AND name = ?",
                       (organization_id, name)):
            raise DuplicateEntity(f"facility {name!r} in organization")
        fac = Facility(_new_id(), organization_id, name)
        with self.db.tx() as conn:
            conn.execute("INSERT INTO facilities (id, organization_id, name) VALUES (?, ?, ?)",
                         (fac.id, fac.organization_id, fac.name))
        return fac

    def get_facility(self, facility_id: str) -> Facility | None:
        row = self.db.one("SELECT * FROM facilities WHERE id = ?", (facility_id,))
        return Facility(row["id"], row["organization_id"], row["name"]) if row else None

    def list_facilities(self, organization_id: str | None = None) -> list[Facility]:
        if organization_id:
            rows = self.db.query("SELECT * FROM facilities WHERE organization_id = ? ORDER BY name",
                                 (organization_id,))
        else:
            rows = self.db.query("SELECT * FROM facilities ORDER BY name")
        return [Facility(r["id"], r["organization_id"], r["name"]) for r in rows]

    def update_facility(self, facility_id: str, name: str) -> Facility:
        fac = self.get_facility(facility_id)
        if not fac:
            raise UnknownEntity(f"facility {facility_id}")
        clash = self.db.one(
            "SELECT 1 FROM facilities WHERE organization_id = ? AND name = ? AND id != ?",
            (fac.organization_id, name, facility_id))
        if clash:
            raise DuplicateEntity(f"facility {name!r} in organization")
        with self.db.tx() as conn:
            conn.execute("UPDATE facilities SET name = ? WHERE id = ?", (name, facility_id))
        return Facility(facility_id, fac.organization_id, name)

    def delete_facility(self, facility_id: str) -> None:
        if not self.get_facility(facility_id):
            raise UnknownEntity(f"facility {facility_id}")
        for table, column in (("user_facilities", "facility_id"), ("resource_facilities", "facility_id")):
            if self.db.one(f"SELECT 1 FROM {table} WHERE {column} = ? LIMIT 1", (facility_id,)):
                raise ReferencedEntity(f"facility {facility_id} still referenced by {table}")
        with self.db.tx() as conn:
            conn.execute("DELETE FROM facilities WHERE id = ?", (facility_id,))

    # -- users -----------------------------------------------------------

    def create_user(self, username: str, password: str, organization_id: str,
                    email: str = "") -> User:
        if not self.get_organization(organization_id):
            raise UnknownEntity(f"organization {organization_id}")
        if self.db.one("SELECT 1 FROM users WHERE username = ?", (username,)):
            raise DuplicateEntity(f"username {username!r}")
        salt = os.urandom(16)
        digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, _PBKDF2_ITERATIONS)
        user_id = _new_id()
        with self.db.tx() as conn:
            conn.execute(
                "INSERT INTO users (id, username, email, password_salt, password_hash, organization_id)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (user_id, username, email, salt, digest, organization_id))
        return User(user_id, username, email, organization_id)

    def _user_from_row(self, row) -> User:
        facs = self.db.query("SELECT facility_id FROM user_facilities WHERE user_id = ?", (row["id"],))
        roles = self.db.query("SELECT role_id FROM user_roles WHERE user_id = ?", (row["id"],))
        return User(
            id=row["id"], username=row["username"], email=row["email"],
            organization_id=row["organization_id"],
            facility_ids=frozenset(r["facility_id"] for r in facs),
            role_ids=frozenset(r["role_id"] for r in roles),
            deleted=bool(row["deleted"]),
        )

    def get_user(self, user_id: str, include_deleted: bool = False) -> User | None:
        row = self.db.one("SELECT * FROM users WHERE id = ?", (user_id,))
        if row is None or (row["deleted"] and not include_deleted):
            return None
        return self._user_from_row(row)

    def get_user_by_username(self, username: str) -> User | None:
        row = self.db.one("SELECT * FROM users WHERE username = ? AND deleted = 0", (username,))
        return self._user_from_row(row) if row else None

    def list_users(self, organization_id: str | None = None) -> list[User]:
        if organization_id:
            rows = self.db.query(
                "SELECT * FROM users WHERE organization_id = ? AND deleted = 0 ORDER BY username",
                (organization_id,))
        else:
            rows = self.db.query("SELECT * FROM users WHERE deleted = 0 ORDER BY username")
        return [self._user_from_row(r) for r in rows]

    def update_user(self, user_id: str, email: str | None = None,
                    password: str | None = None) -> User:
        if not self.get_user(user_id):
            raise UnknownUser(user_id)
        with self.db.tx() as conn:
            if email is not None:
                conn.execute("UPDATE users SET email = ? WHERE id = ?", (email, user_id))
            if password is not None:
                salt = os.urandom(16)
                digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, _PBKDF2_ITERATIONS)
                conn.execute("UPDATE users SET password_salt = ?, password_hash = ? WHERE id = ?",
                             (salt, digest, user_id))
        return self.get_user(user_id)

    def soft_delete_user(self, user_id: str) -> None:
        if not self.get_user(user_id):
            raise UnknownUser(user_id)
        with self.db.tx() as conn:
            conn.execute("UPDATE users SET deleted = 1 WHERE id = ?", (user_id,))

    def verify_credentials(self, username: str, password: str) -> User | None:
        row = self.db.one("SELECT * FROM users WHERE username = ? AND deleted = 0", (username,))
        if row is None:
            # burn comparable time so missing users are indistinguishable
            hashlib.pbkdf2_hmac("sha256", password.encode(), b"\x00" * 16, _PBKDF2_ITERATIONS)
            return None
        digest = hashlib.pbkdf2_hmac("sha256", password.encode(), row["password_salt"], _PBKDF2_ITERATIONS)
        if not hmac.compare_digest(digest, row["password_hash"]):
            return None
        return self._user_from_row(row)

    def assign_facility(self, user_id: str, facility_id: str) -> None:
        user = self.get_user(user_id)
        if not user:
            raise UnknownUser(user_id)
        facility = self.get_facility(facility_id)
        if not facility:
            raise UnknownEntity(f"facility {facility_id}")
        if facility.organization_id != user.organization_id:
            raise InvariantViolation("facility belongs to a different organization")
        with self.db.tx() as conn:
            conn.execute("INSERT OR IGNORE INTO user_facilities (user_id, facility_id) VALUES (?, ?)",
                         (user_id, facility_id))

    def unassign_facility(self, user_id: str, facility_id: str) -> None:
        with self.db.tx() as conn:
            conn.execute("DELETE FROM user_facilities WHERE user_id = ? AND facility_id = ?",
                         (user_id, facility_id))

    def assign_role(self, user_id: str, role_id: str) -> None:
        user = self.get_user(user_id)
        if not user:
            raise UnknownUser(user_id)
        role = self.get_role(role_id)
        if not role:
            raise UnknownRole(role_id)
        if role.organization_id != user.organization_id:
            raise InvariantViolation("role belongs to a different organization")
        with self.db.tx() as conn:
            conn.execute("INSERT OR IGNORE INTO user_roles (user_id, role_id) VALUES (?, ?)",
                         (user_id, role_id))

    def unassign_role(self, user_id: str, role_id: str) -> None:
        with self.db.tx() as conn:
            conn.execute("DELETE FROM user_roles WHERE user_id = ? AND role_id = ?",
                         (user_id, role_id))

    # -- roles and permissions -------------------------------------------

    def create_role(self, organization_id: str, name: str) -> Role:
        if not self.get_organization(organization_id):
            raise UnknownEntity(f"organization {organization_id}")
        if self.db.one("SELECT 1 FROM roles WHERE organization_id = ? AND name = ?",
                       (organization_id, name)):
            raise DuplicateEntity(f"role {name!r} in organization")
        role = Role(_new_id(), organization_id, name)
        with self.db.tx() as conn:
            conn.execute("INSERT INTO roles (id, organization_id, name) VALUES (?, ?, ?)",
                         (role.id, role.organization_id, role.name))
        return role

    def get_role(self, role_id: str) -> Role | None:
        row = self.db.one("SELECT * FROM roles WHERE id = ?", (role_id,))
        return Role(row["id"], row["organization_id"], row["name"]) if row else None

    def list_roles(self, organization_id: str | None = None) -> list[Role]:
        if organization_id:
            rows = self.db.query("SELECT * FROM roles WHERE organization_id = ? ORDER BY name",
                                 (organization_id,))
        else:
            rows = self.db.query("SELECT * FROM roles ORDER BY name")
        return [Role(r["id"], r["organization_id"], r["name"]) for r in rows]

    def update_role(self, role_id: str, name: str) -> Role:
        role = self.get_role(role_id)
        if not role:
            raise UnknownRole(role_id)
        clash = self.db.one("SELECT 1 FROM roles WHERE organization_id = ? AND name = ? AND id != ?",
                            (role.organization_id, name, role_id))
        if clash:
            raise DuplicateEntity(f"role {name!r} in organization")
        with self.db.tx() as conn:
            conn.execute("UPDATE roles SET name = ? WHERE id = ?", (name, role_id))
        return Role(role_id, role.organization_id, name)

    def delete_role(self, role_id: str) -> None:
        if not self.get_role(role_id):
            raise UnknownRole(role_id)
        if self.db.one("SELECT 1 FROM user_roles WHERE role_id = ? LIMIT 1", (role_id,)):
            raise ReferencedEntity(f"role {role_id} still has members")
        with self.db.tx() as conn:
            conn.execute("DELETE FROM permissions WHERE role_id = ?", (role_id,))
            conn.execute("DELETE FROM roles WHERE id = ?", (role_id,))

    def _permission_from_row(self, row) -> Permission:
        modalities = row["modalities"]
        return Permission(
            id=row["id"],
            operation=Operation(row["operation"]),
            category=Category(row["category"]),
            scope=Scope(row["scope"]),
            modality_filter=frozenset(json.loads(modalities)) if modalities else None,
            validity=_row_window(row),
        )

    def add_permission(self, role_id: str, operation: Operation, category: Category,
                       scope: Scope, modality_filter: frozenset[str] | None = None,
                       validity: tuple[float, float] | None = None) -> Permission:
        if not self.get_role(role_id):
            raise UnknownRole(role_id)
        if modality_filter and category is not Category.RESOURCE:
            raise InvariantViolation("modality filter applies to RESOURCE grants only")
        start, end = _check_window(validity)
        mod_json = json.dumps(sorted(modality_filter)) if modality_filter else None
        existing = self.db.one(
            "SELECT * FROM permissions WHERE role_id = ? AND operation = ? AND category = ?"
            " AND scope = ? AND modalities IS ? AND valid_from IS ? AND valid_to IS ?",
            (role_id, operation.value, category.value, scope.value, mod_json, start, end))
        if existing:
            return self._permission_from_row(existing)
        perm_id = _new_id()
        with self.db.tx() as conn:
            conn.execute(
                "INSERT INTO permissions (id, role_id, operation, category, scope, modalities,"
                " valid_from, valid_to) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (perm_id, role_id, operation.value, category.value, scope.value, mod_json, start, end))
        return Permission(perm_id, operation, category, scope, modality_filter,
                          (start, end) if start is not None else None)

    def remove_permission(self, role_id: str, permission_id: str) -> None:
        row = self.db.one("SELECT 1 FROM permissions WHERE id = ? AND role_id = ?",
                          (permission_id, role_id))
        if not row:
            raise UnknownGrant(permission_id)
        with self.db.tx() as conn:
            conn.execute("DELETE FROM permissions WHERE id = ?", (permission_id,))

    def permissions_of_role(self, role_id: str) -> list[Permission]:
        if not self.get_role(role_id):
            raise UnknownRole(role_id)
        rows = self.db.query("SELECT * FROM permissions WHERE role_id = ?", (role_id,))
        return [self._permission_from_row(r) for r in rows]

    def permissions_for_user(self, user_id: str) -> list[Permission]:
        rows = self.db.query(
            "SELECT p.* FROM permissions p JOIN user_roles ur ON ur.role_id = p.role_id"
            " WHERE ur.user_id = ?", (user_id,))
        return [self._permission_from_row(r) for r in rows]

    # -- resources ---------------------------------------------------------

    def register_resource(self, descriptor: ResourceDescriptor) -> None:
        if self.db.one("SELECT 1 FROM resources WHERE id = ?", (descriptor.resource_id,)):
            raise DuplicateResource(descriptor.resource_id)
        if descriptor.sop_instance_uid and self.db.one(
                "SELECT 1 FROM resources WHERE sop_instance_uid = ?", (descriptor.sop_instance_uid,)):
            raise DuplicateResource(f"sop {descriptor.sop_instance_uid}")
        if not self.get_organization(descriptor.organization_id):
            raise UnknownEntity(f"organization {descriptor.organization_id}")
        for facility_id in descriptor.facility_ids:
            facility = self.get_facility(facility_id)
            if not facility:
                raise UnknownEntity(f"facility {facility_id}")
            if facility.organization_id != descriptor.organization_id:
                raise InvariantViolation("resource facility outside its organization")
        with self.db.tx() as conn:
            conn.execute(
                "INSERT INTO resources (id, kind, owner_user_id, organization_id, modality,"
                " sop_instance_uid) VALUES (?, ?, ?, ?, ?, ?)",
                (descriptor.resource_id, descriptor.kind.value, descriptor.owner_user_id,
                 descriptor.organization_id, descriptor.modality, descriptor.sop_instance_uid))
            for facility_id in descriptor.facility_ids:
                conn.execute("INSERT INTO resource_facilities (resource_id, facility_id) VALUES (?, ?)",
                             (descriptor.resource_id, facility_id))

    def _resource_from_row(self, row) -> ResourceDescriptor:
        facs = self.db.query("SELECT facility_id FROM resource_facilities WHERE resource_id = ?",
                             (row["id"],))
        return ResourceDescriptor(
            resource_id=row["id"], kind=ResourceKind(row["kind"]),
            owner_user_id=row["owner_user_id"], organization_id=row["organization_id"],
            facility_ids=frozenset(r["facility_id"] for r in facs),
            modality=row["modality"], sop_instance_uid=row["sop_instance_uid"])

    def get_resource(self, resource_id: str, include_deleted: bool = False) -> ResourceDescriptor | None:
        row = self.db.one("SELECT * FROM resources WHERE id = ?", (resource_id,))
        if row is None or (row["deleted"] and not include_deleted):
            return None
        return self._resource_from_row(row)

    def get_resource_by_sop(self, sop_instance_uid: str) -> ResourceDescriptor | None:
        row = self.db.one("SELECT * FROM resources WHERE sop_instance_uid = ? AND deleted = 0",
                          (sop_instance_uid,))
        return self._resource_from_row(row) if row else None

    def list_resources(self) -> list[ResourceDescriptor]:
        rows = self.db.query("SELECT * FROM resources WHERE deleted = 0 ORDER BY rowid")
        return [self._resource_from_row(r) for r in rows]

    def soft_delete_resource(self, resource_id: str) -> None:
        if not self.get_resource(resource_id):
            raise UnknownResource(resource_id)
        with self.db.tx() as conn:
            conn.execute("UPDATE resources SET deleted = 1 WHERE id = ?", (resource_id,))

    def add_resource_grant(self, resource_id: str, subject_kind: str, subject_id: str,
                           operation: Operation) -> None:
        with self.db.tx() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO resource_grants (id, resource_id, subject_kind, subject_id,"
                " operation) VALUES (?, ?, ?, ?, ?)",
                (_new_id(), resource_id, subject_kind, subject_id, operation.value))

    def resource_grants(self, resource_id: str) -> list[ResourceGrant]:
        rows = self.db.query("SELECT * FROM resource_grants WHERE resource_id = ?", (resource_id,))
        return [ResourceGrant(r["id"], r["resource_id"], r["subject_kind"], r["subject_id"],
                              Operation(r["operation"])) for r in rows]

    def matching_resource_grant(self, resource_id: str, operation: Operation,
                                user: User) -> ResourceGrant | None:
        row = self.db.one(
            "SELECT g.* FROM resource_grants g WHERE g.resource_id = ? AND g.operation = ? AND ("
            " (g.subject_kind = 'USER' AND g.subject_id = ?) OR"
            " (g.subject_kind = 'FACILITY' AND g.subject_id IN"
            "   (SELECT facility_id FROM user_facilities WHERE user_id = ?))) LIMIT 1",
            (resource_id, operation.value, user.id, user.id))
        if row is None:
            return None
        return ResourceGrant(row["id"], row["resource_id"], row["subject_kind"],
                             row["subject_id"], Operation(row["operation"]))

    # -- shares ------------------------------------------------------------

    def _share_from_row(self, row) -> Share:
        return Share(
            id=row["id"], grantor_user_id=row["grantor_user_id"],
            grantee_user_id=row["grantee_user_id"], resource_id=row["resource_id"],
            operations=frozenset(Operation(o) for o in json.loads(row["operations"])),
            validity=_row_window(row))

    def add_share(self, grantor_user_id: str, grantee_user_id: str, resource_id: str,
                  operations: frozenset[Operation],
                  validity: tuple[float, float] | None = None) -> Share:
        if grantor_user_id == grantee_user_id:
            raise InvariantViolation("cannot share a resource with yourself")
        if not operations or not operations <= SHAREABLE_OPERATIONS:
            raise InvariantViolation("shareable operations are GET, LIST, SHARE")
        if not self.get_user(grantee_user_id):
            raise UnknownUser(grantee_user_id)
        if not self.get_resource(resource_id):
            raise UnknownResource(resource_id)
        start, end = _check_window(validity)
        share_id = _new_id()
        with self.db.tx() as conn:
            conn.execute(
                "INSERT INTO shares (id, grantor_user_id, grantee_user_id, resource_id, operations,"
                " valid_from, valid_to) VALUES (?, ?, ?, ?, ?, ?, ?)",
                (share_id, grantor_user_id, grantee_user_id, resource_id,
                 json.dumps(sorted(o.value for o in operations)), start, end))
        return Share(share_id, grantor_user_id, grantee_user_id, resource_id,
                     frozenset(operations), (start, end) if start is not None else None)

    def get_share(self, share_id: str) -> Share | None:
        row = self.db.one("SELECT * FROM shares WHERE id = ?", (share_id,))
        return self._share_from_row(row) if row else None

    def revoke_share(self, share_id: str) -> None:
        if not self.get_share(share_id):
            raise UnknownGrant(share_id)
        with self.db.tx() as conn:
            conn.execute("DELETE FROM shares WHERE id = ?", (share_id,))

    def shares_to(self, grantee_user_id: str, resource_id: str | None = None) -> list[Share]:
        if resource_id:
            rows = self.db.query("SELECT * FROM shares WHERE grantee_user_id = ? AND resource_id = ?",
                                 (grantee_user_id, resource_id))
        else:
            rows = self.db.query("SELECT * FROM shares WHERE grantee_user_id = ?", (grantee_user_id,))
        return [self._share_from_row(r) for r in rows]

    def shares_involving(self, user_id: str) -> list[Share]:
        rows = self.db.query(
            "SELECT * FROM shares WHERE grantee_user_id = ? OR grantor_user_id = ?",
            (user_id, user_id))
        return [self._share_from_row(r) for r in rows]

    # -- aggregates ----------------------------------------------------------

    def entity_counts(self) -> dict[str, int]:
        return {
            "organizations": self.db.scalar("SELECT COUNT(*) FROM organizations"),
            "facilities": self.db.scalar("SELECT COUNT(*) FROM facilities"),
            "users": self.db.scalar("SELECT COUNT(*) FROM users WHERE deleted = 0"),
            "roles": self.db.scalar("SELECT COUNT(*) FROM roles"),
            "resources": self.db.scalar("SELECT COUNT(*) FROM resources WHERE deleted = 0"),
            "shares": self.db.scalar("SELECT COUNT(*) FROM shares"),
        }
