"""Token resolution and the request guards shared by the web routers."""

from __future__ import annotations

import time

from fastapi import HTTPException, Request

from ..rbac import User
from .services import VaultServices


def get_services(request: Request) -> VaultServices:
    return request.app.state.services


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def resolve_bearer_user(request: Request, services: VaultServices) -> User:
    """Token -> active user, or the 401/403 split: bad credentials are 401,
    a live token whose user left the access-control system is 403."""
    header = request.headers.get("authorization", "")
    if not header:
        raise _error(401, "missing_token", "Authorization header required")
    scheme, _, credential = header.partition(" ")
    credential = credential.strip()
    if scheme.lower() != "bearer" or not credential:
        raise _error(401, "malformed_token", "expected 'Authorization: Bearer <token>'")
    user_id = services.tokens.resolve(credential, time.time())
    if user_id is None:
        raise _error(401, "invalid_token", "token unknown or expired")
    user = services.rbac_store.get_user(user_id)
    if user is None:
        raise _error(403, "not_a_member", "user is not part of the access control system")
    request.state.audit_user_id = user.id
    request.state.audit_username = user.username
    return user


def dicomweb_guard(request: Request) -> None:
    """The protecting barrier in front of every DICOMWeb service route."""
    services = get_services(request)
    request.state.audit_category = "RESOURCE"
    if not services.rbac_mode:
        request.state.user = None
        return
    request.state.user = resolve_bearer_user(request, services)


def dicomweb_fallback_guard(request: Request) -> None:
    """Best-effort attribution for invalid-service requests; never blocks the 400."""
    services = get_services(request)
    try:
        if services.rbac_mode:
            request.state.user = resolve_bearer_user(request, services)
    except HTTPException:
        request.state.user = None


def mgmt_guard(request: Request) -> None:
    """Management calls always authenticate, even with the DICOMWeb filter off."""
    services = get_services(request)
    request.state.user = resolve_bearer_user(request, services)
