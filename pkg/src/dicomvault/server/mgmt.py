"""Management REST surface: entity CRUD, grants, shares, audit review, settings.

Every mutation re-enters the decision engine with its (operation, category)
pair; turning the DICOMWeb filter off never relaxes these routes.
"""

from __future__ import annotations

import time
import uuid
from datetime import datetime, timezone

from fastapi import APIRouter, Depends, HTTPException, Request, Response
from pydantic import BaseModel, Field

from ..rbac import (
    Category,
    Facility,
    Operation,
    Organization,
    Permission,
    ResourceDescriptor,
    ResourceKind,
    Role,
    Scope,
    Share,
    User,
    normalize_operation,
)
from .deps import get_services, mgmt_guard

router = APIRouter(dependencies=[Depends(mgmt_guard)])


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _instant(value) -> float | None:
    if value is None:
        return None
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().replace("Z", "+00:00")
    try:
        parsed = datetime.fromisoformat(text)
    except ValueError:
        raise _error(422, "bad_instant", f"not an epoch or ISO-8601 instant: {value!r}")
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.timestamp()


def _window(valid_from, valid_to) -> tuple[float, float] | None:
    start, end = _instant(valid_from), _instant(valid_to)
    if (start is None) != (end is None):
        raise _error(422, "half_open_window", "valid_from and valid_to come as a pair")
    return (start, end) if start is not None else None


def require(request: Request, operation: Operation, category: Category) -> User:
    request.state.audit_category = category.value
    request.state.audit_operation = operation.value
    services = get_services(request)
    user = request.state.user
    decision = services.engine.authorize(user.id, operation, category, None, time.time())
    if not decision.allowed:
        raise _error(403, "forbidden",
                     f"{operation.value} {category.value} denied: {decision.reason.value}")
    return user


# -- wire formats -------------------------------------------------------------


def org_json(org: Organization) -> dict:
    return {"id": org.id, "name": org.name}


def facility_json(fac: Facility) -> dict:
    return {"id": fac.id, "organization_id": fac.organization_id, "name": fac.name}


def user_json(user: User) -> dict:
    return {"id": user.id, "username": user.username, "email": user.email,
            "organization_id": user.organization_id,
            "facility_ids": sorted(user.facility_ids), "role_ids": sorted(user.role_ids)}


def role_json(role: Role) -> dict:
    return {"id": role.id, "organization_id": role.organization_id, "name": role.name}


def permission_json(perm: Permission) -> dict:
    return {"id": perm.id, "operation": perm.operation.value, "category": perm.category.value,
            "scope": perm.scope.value,
            "modality_filter": sorted(perm.modality_filter) if perm.modality_filter else None,
            "valid_from": perm.validity[0] if perm.validity else None,
            "valid_to": perm.validity[1] if perm.validity else None}


def resource_json(res: ResourceDescriptor) -> dict:
    return {"id": res.resource_id, "kind": res.kind.value, "owner_user_id": res.owner_user_id,
            "organization_id": res.organization_id, "facility_ids": sorted(res.facility_ids),
            "modality": res.modality, "sop_instance_uid": res.sop_instance_uid}


def share_json(share: Share) -> dict:
    return {"id": share.id, "grantor_user_id": share.grantor_user_id,
            "grantee_user_id": share.grantee_user_id, "resource_id": share.resource_id,
            "operations": sorted(o.value for o in share.operations),
            "valid_from": share.validity[0] if share.validity else None,
            "valid_to": share.validity[1] if share.validity else None}


class OrganizationBody(BaseModel):
    name: str


class FacilityBody(BaseModel):
    organization_id: str
    name: str


class FacilityRename(BaseModel):
    name: str


class UserBody(BaseModel):
    username: str
    password: str
    organization_id: str
    email: str = ""
    facility_ids: list[str] = Field(default_factory=list)
    role_ids: list[str] = Field(default_factory=list)


class UserUpdate(BaseModel):
    email: str | None = None
    password: str | None = None


class RoleBody(BaseModel):
    organization_id: str
    name: str


class RoleRename(BaseModel):
    name: str


class PermissionBody(BaseModel):
    operation: str
    category: str
    scope: str
    modality_filter: list[str] | None = None
    valid_from: float | str | None = None
    valid_to: float | str | None = None


class ResourceBody(BaseModel):
    kind: str = ResourceKind.DICOM_INSTANCE.value
    owner_user_id: str
    organization_id: str
    facility_ids: list[str] = Field(default_factory=list)
    modality: str = ""
    sop_instance_uid: str | None = None


class ShareBody(BaseModel):
    grantee_user_id: str
    resource_id: str
    operations: list[str]
    valid_from: float | str | None = None
    valid_to: float | str | None = None


class SettingsBody(BaseModel):
    rbac_mode: bool


# -- session profile -----------------------------------------------------------


@router.get("/me")
def whoami(request: Request):
    request.state.audit_category = "USER"
    request.state.audit_operation = "GET"
    return user_json(request.state.user)


# -- organizations ---------------------------------------------------------------


@router.post("/organizations", status_code=201)
def create_organization(body: OrganizationBody, request: Request):
    require(request, Operation.ADD, Category.ORGANIZATION)
    return org_json(get_services(request).rbac_store.create_organization(body.name))


@router.get("/organizations")
def list_organizations(request: Request):
    require(request, Operation.LIST, Category.ORGANIZATION)
    return [org_json(o) for o in get_services(request).rbac_store.list_organizations()]


@router.get("/organizations/{org_id}")
def get_organization(org_id: str, request: Request):
    require(request, Operation.GET, Category.ORGANIZATION)
    org = get_services(request).rbac_store.get_organization(org_id)
    if org is None:
        raise _error(404, "not_found", f"no organization {org_id}")
    return org_json(org)


@router.put("/organizations/{org_id}")
def update_organization(org_id: str, body: OrganizationBody, request: Request):
    require(request, Operation.UPDATE, Category.ORGANIZATION)
    return org_json(get_services(request).rbac_store.update_organization(org_id, body.name))


@router.delete("/organizations/{org_id}", status_code=204)
def delete_organization(org_id: str, request: Request):
    require(request, Operation.DELETE, Category.ORGANIZATION)
    get_services(request).rbac_store.delete_organization(org_id)
    return Response(status_code=204)


# -- facilities --------------------------------------------------------------------


@router.post("/facilities", status_code=201)
def create_facility(body: FacilityBody, request: Request):
    require(request, Operation.ADD, Category.FACILITY)
    return facility_json(get_services(request).rbac_store.create_facility(
        body.organization_id, body.name))


@router.get("/facilities")
def list_facilities(request: Request, organization_id: str | None = None):
    require(request, Operation.LIST, Category.FACILITY)
    return [facility_json(f)
            for f in get_services(request).rbac_store.list_facilities(organization_id)]


@router.get("/facilities/{facility_id}")
def get_facility(facility_id: str, request: Request):
    require(request, Operation.GET, Category.FACILITY)
    fac = get_services(request).rbac_store.get_facility(facility_id)
    if fac is None:
        raise _error(404, "not_found", f"no facility {facility_id}")
    return facility_json(fac)


@router.put("/facilities/{facility_id}")
def update_facility(facility_id: str, body: FacilityRename, request: Request):
    require(request, Operation.UPDATE, Category.FACILITY)
    return facility_json(get_services(request).rbac_store.update_facility(facility_id, body.name))


@router.delete("/facilities/{facility_id}", status_code=204)
def delete_facility(facility_id: str, request: Request):
    require(request, Operation.DELETE, Category.FACILITY)
    get_services(request).rbac_store.delete_facility(facility_id)
    return Response(status_code=204)


# -- users ----------------------------------------------------------------------


@router.post("/users", status_code=201)
def create_user(body: UserBody, request: Request):
    require(request, Operation.ADD, Category.USER)
    store = get_services(request).rbac_store
    user = store.create_user(body.username, body.password, body.organization_id, body.email)
    for facility_id in body.facility_ids:
        store.assign_facility(user.id, facility_id)
    for role_id in body.role_ids:
        store.assign_role(user.id, role_id)
    return user_json(store.get_user(user.id))


@router.get("/users")
def list_users(request: Request, organization_id: str | None = None):
    require(request, Operation.LIST, Category.USER)
    return [user_json(u) for u in get_services(request).rbac_store.list_users(organization_id)]


@router.get("/users/{user_id}")
def get_user(user_id: str, request: Request):
    require(request, Operation.GET, Category.USER)
    user = get_services(request).rbac_store.get_user(user_id)
    if user is None:
        raise _error(404, "not_found", f"no user {user_id}")
    return user_json(user)


@router.put("/users/{user_id}")
def update_user(user_id: str, body: UserUpdate, request: Request):
    require(request, Operation.UPDATE, Category.USER)
    return user_json(get_services(request).rbac_store.update_user(
        user_id, email=body.email, password=body.password))


@router.delete("/users/{user_id}", status_code=204)
def delete_user(user_id: str, request: Request):
    require(request, Operation.DELETE, Category.USER)
    services = get_services(request)
    services.rbac_store.soft_delete_user(user_id)
    services.tokens.invalidate_user(user_id)
    return Response(status_code=204)


@router.post("/users/{user_id}/roles/{role_id}", status_code=204)
def assign_role(user_id: str, role_id: str, request: Request):
    require(request, Operation.UPDATE, Category.USER)
    get_services(request).rbac_store.assign_role(user_id, role_id)
    return Response(status_code=204)


@router.delete("/users/{user_id}/roles/{role_id}", status_code=204)
def unassign_role(user_id: str, role_id: str, request: Request):
    require(request, Operation.UPDATE, Category.USER)
    get_services(request).rbac_store.unassign_role(user_id, role_id)
    return Response(status_code=204)


@router.post("/users/{user_id}/facilities/{facility_id}", status_code=204)
def assign_facility(user_id: str, facility_id: str, request: Request):
    require(request, Operation.UPDATE, Category.USER)
    get_services(request).rbac_store.assign_facility(user_id, facility_id)
    return Response(status_code=204)


@router.delete("/users/{user_id}/facilities/{facility_id}", status_code=204)
def unassign_facility(user_id: str, facility_id: str, request: Request):
    require(request, Operation.UPDATE, Category.USER)
    get_services(request).rbac_store.unassign_facility(user_id, facility_id)
    return Response(status_code=204)


@router.get("/users/{user_id}/effective")
def effective_permissions(user_id: str, request: Request, at: float | str | None = None):
    if request.state.user.id != user_id:
        require(request, Operation.GET, Category.USER)
    else:
        request.state.audit_category = "USER"
        request.state.audit_operation = "GET"
    services = get_services(request)
    moment = _instant(at) if at is not None else time.time()
    grants, shares = services.engine.effective_permissions(user_id, moment)
    return {
        "grants": sorted(
            ({"operation": op.value, "category": cat.value, "scope": scope.value,
              "modality_filter": sorted(mods) if mods else None}
             for op, cat, scope, mods in grants),
            key=lambda g: (g["category"], g["operation"], g["scope"])),
        "shares": [share_json(s) for s in shares],
    }


# -- roles and permissions ---------------------------------------------------------


@router.post("/roles", status_code=201)
def create_role(body: RoleBody, request: Request):
    require(request, Operation.ADD, Category.ROLE)
    return role_json(get_services(request).rbac_store.create_role(body.organization_id, body.name))


@router.get("/roles")
def list_roles(request: Request, organization_id: str | None = None):
    require(request, Operation.LIST, Category.ROLE)
    return [role_json(r) for r in get_services(request).rbac_store.list_roles(organization_id)]


@router.get("/roles/{role_id}")
def get_role(role_id: str, request: Request):
    require(request, Operation.GET, Category.ROLE)
    role = get_services(request).rbac_store.get_role(role_id)
    if role is None:
        raise _error(404, "not_found", f"no role {role_id}")
    return role_json(role)


@router.put("/roles/{role_id}")
def update_role(role_id: str, body: RoleRename, request: Request):
    require(request, Operation.UPDATE, Category.ROLE)
    return role_json(get_services(request).rbac_store.update_role(role_id, body.name))


@router.delete("/roles/{role_id}", status_code=204)
def delete_role(role_id: str, request: Request):
    require(request, Operation.DELETE, Category.ROLE)
    get_services(request).rbac_store.delete_role(role_id)
    return Response(status_code=204)


@router.post("/roles/{role_id}/permissions", status_code=201)
def grant_permissions(role_id: str, body: PermissionBody, request: Request):
    require(request, Operation.UPDATE, Category.ROLE)
    services = get_services(request)
    try:
        operations = normalize_operation(body.operation)
        category = Category(body.category.strip().upper())
        scope = Scope(body.scope.strip().upper())
    except ValueError as exc:
        raise _error(422, "bad_enum", str(exc))
    window = _window(body.valid_from, body.valid_to)
    modality_filter = frozenset(body.modality_filter) if body.modality_filter else None
    created = [
        permission_json(services.engine.grant_permission(
            role_id, operation, category, scope, modality_filter, window))
        for operation in operations
    ]
    return {"created": created}


@router.get("/roles/{role_id}/permissions")
def list_role_permissions(role_id: str, request: Request):
    require(request, Operation.GET, Category.ROLE)
    return [permission_json(p)
            for p in get_services(request).rbac_store.permissions_of_role(role_id)]


@router.delete("/roles/{role_id}/permissions/{permission_id}", status_code=204)
def revoke_permission(role_id: str, permission_id: str, request: Request):
    require(request, Operation.UPDATE, Category.ROLE)
    get_services(request).engine.revoke_permission(role_id, permission_id)
    return Response(status_code=204)


# -- resources ----------------------------------------------------------------------


@router.get("/resources")
def list_resources(request: Request):
    """Truncated like QIDO: only resources the caller may LIST are returned."""
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "LIST"
    services = get_services(request)
    user = request.state.user
    now = time.time()
    visible = []
    for resource in services.rbac_store.list_resources():
        if services.engine.authorize(user.id, Operation.LIST, Category.RESOURCE,
                                     resource, now).allowed:
            visible.append(resource_json(resource))
    return visible


@router.post("/resources", status_code=201)
def create_resource(body: ResourceBody, request: Request):
    require(request, Operation.ADD, Category.RESOURCE)
    services = get_services(request)
    try:
        kind = ResourceKind(body.kind.strip().upper())
    except ValueError as exc:
        raise _error(422, "bad_enum", str(exc))
    descriptor = ResourceDescriptor(
        resource_id=uuid.uuid4().hex, kind=kind, owner_user_id=body.owner_user_id,
        organization_id=body.organization_id, facility_ids=frozenset(body.facility_ids),
        modality=body.modality, sop_instance_uid=body.sop_instance_uid)
    services.engine.register_resource(descriptor)
    return resource_json(descriptor)


@router.get("/resources/{resource_id}")
def get_resource(resource_id: str, request: Request):
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "GET"
    services = get_services(request)
    resource = services.rbac_store.get_resource(resource_id)
    if resource is None:
        raise _error(404, "not_found", f"no resource {resource_id}")
    decision = services.engine.authorize(request.state.user.id, Operation.GET,
                                         Category.RESOURCE, resource, time.time())
    if not decision.allowed:
        raise _error(403, "forbidden", f"GET denied: {decision.reason.value}")
    return resource_json(resource)


@router.delete("/resources/{resource_id}", status_code=204)
def delete_resource(resource_id: str, request: Request):
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "DELETE"
    services = get_services(request)
    resource = services.rbac_store.get_resource(resource_id)
    if resource is None:
        raise _error(404, "not_found", f"no resource {resource_id}")
    decision = services.engine.authorize(request.state.user.id, Operation.DELETE,
                                         Category.RESOURCE, resource, time.time())
    if not decision.allowed:
        raise _error(403, "forbidden", f"DELETE denied: {decision.reason.value}")
    services.rbac_store.soft_delete_resource(resource_id)
    return Response(status_code=204)


# -- shares -----------------------------------------------------------------------


@router.post("/shares", status_code=201)
def create_share(body: ShareBody, request: Request):
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "SHARE"
    services = get_services(request)
    try:
        operations = frozenset(Operation(op.strip().upper()) for op in body.operations)
    except ValueError as exc:
        raise _error(422, "bad_enum", str(exc))
    share = services.engine.create_share(
        request.state.user.id, body.grantee_user_id, body.resource_id, operations,
        _window(body.valid_from, body.valid_to), now=time.time())
    return share_json(share)


@router.get("/shares")
def list_shares(request: Request):
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "LIST"
    services = get_services(request)
    return [share_json(s)
            for s in services.rbac_store.shares_involving(request.state.user.id)]


@router.delete("/shares/{share_id}", status_code=204)
def revoke_share(share_id: str, request: Request):
    request.state.audit_category = "RESOURCE"
    request.state.audit_operation = "UPDATE"
    services = get_services(request)
    share = services.rbac_store.get_share(share_id)
    if share is None:
        raise _error(404, "not_found", f"no share {share_id}")
    if share.grantor_user_id != request.state.user.id:
        resource = services.rbac_store.get_resource(share.resource_id, include_deleted=True)
        decision = services.engine.authorize(request.state.user.id, Operation.UPDATE,
                                             Category.RESOURCE, resource, time.time())
        if not decision.allowed:
            raise _error(403, "forbidden", "only the grantor or a resource updater may revoke")
    services.rbac_store.revoke_share(share_id)
    return Response(status_code=204)


# -- audit review -------------------------------------------------------------------


@router.get("/audit")
def read_audit(request: Request, user_id: str | None = None, username: str | None = None,
               category: str | None = None, operation: str | None = None,
               status: int | None = None, client_ip: str | None = None,
               since: float | str | None = None, until: float | str | None = None,
               limit: int = 100, offset: int = 0):
    require(request, Operation.LIST, Category.AUDIT)
    filters = {k: v for k, v in {
        "user_id": user_id, "username": username, "category": category,
        "operation": operation, "status": status, "client_ip": client_ip,
    }.items() if v is not None}
    records = get_services(request).audit.query(
        filters, since=_instant(since), until=_instant(until), limit=limit, offset=offset)
    return [{"timestamp": r.timestamp, "user_id": r.user_id, "username": r.username,
             "request_url": r.request_url, "parameters": r.parameters,
             "category": r.category, "operation": r.operation, "status": r.status,
             "user_agent": r.user_agent, "client_ip": r.client_ip} for r in records]


# -- aggregates, settings, maintenance ----------------------------------------------


@router.get("/stats")
def stats(request: Request):
    request.state.audit_category = "ORGANIZATION"
    request.state.audit_operation = "GET"
    services = get_services(request)
    user = request.state.user
    now = time.time()
    counts = services.rbac_store.entity_counts()

    def permitted(category: Category) -> bool:
        return services.engine.authorize(user.id, Operation.LIST, category, None, now).allowed

    out: dict[str, int | None] = {
        "organizations": counts["organizations"] if permitted(Category.ORGANIZATION) else None,
        "facilities": counts["facilities"] if permitted(Category.FACILITY) else None,
        "users": counts["users"] if permitted(Category.USER) else None,
        "roles": counts["roles"] if permitted(Category.ROLE) else None,
        "audit_records": services.audit.count() if permitted(Category.AUDIT) else None,
        "shares": len(services.rbac_store.shares_involving(user.id)),
    }
    visible_resources = sum(
        1 for resource in services.rbac_store.list_resources()
        if services.engine.authorize(user.id, Operation.LIST, Category.RESOURCE,
                                     resource, now).allowed)
    out["resources"] = visible_resources
    return out


@router.get("/settings")
def get_settings(request: Request):
    request.state.audit_category = "ORGANIZATION"
    request.state.audit_operation = "GET"
    services = get_services(request)
    return {"rbac_mode": services.rbac_mode}


@router.put("/settings")
def put_settings(body: SettingsBody, request: Request):
    require(request, Operation.UPDATE, Category.ORGANIZATION)
    services = get_services(request)
    services.rbac_mode = body.rbac_mode
    return {"rbac_mode": services.rbac_mode}


@router.post("/maintenance/reset-archive")
def reset_archive(request: Request):
    require(request, Operation.DELETE, Category.ORGANIZATION)
    get_services(request).archive.reset()
    return {"reset": True}


@router.post("/maintenance/reindex")
def reindex(request: Request):
    require(request, Operation.UPDATE, Category.ORGANIZATION)
    records, failures = get_services(request).archive.reindex()
    return {"records": records, "failures": [{"uri": u, "error": e} for u, e in failures]}
