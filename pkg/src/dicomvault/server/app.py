"""Application factory: routers, error mapping, audit middleware, console mount."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import archive as archive_errors
from ..audit import AuditStoreUnavailable, MalformedFilter
from ..rbac import errors as rbac_errors
from .dicomweb import auth_router, fallback_router, router as dicomweb_router
from .mgmt import router as mgmt_router
from .middleware import AuditMiddleware
from .services import VaultServices

_ERROR_STATUS = [
    (rbac_errors.DuplicateEntity, 409, "duplicate"),
    (rbac_errors.DuplicateResource, 409, "duplicate"),
    (rbac_errors.ReferencedEntity, 409, "still_referenced"),
    (archive_errors.DuplicateSOPInstanceUID, 409, "duplicate"),
    (rbac_errors.UnknownUser, 404, "not_found"),
    (rbac_errors.UnknownRole, 404, "not_found"),
    (rbac_errors.UnknownGrant, 404, "not_found"),
    (rbac_errors.UnknownResource, 404, "not_found"),
    (rbac_errors.UnknownEntity, 404, "not_found"),
    (archive_errors.NotFound, 404, "not_found"),
    (rbac_errors.InvariantViolation, 422, "invariant_violation"),
    (rbac_errors.InvalidValidityWindow, 422, "invalid_validity_window"),
    (rbac_errors.MalformedRequest, 400, "malformed_request"),
    (archive_errors.MalformedQuery, 400, "malformed_query"),
    (MalformedFilter, 400, "malformed_filter"),
    (rbac_errors.ShareNotPermitted, 403, "forbidden"),
    (archive_errors.Forbidden, 403, "forbidden"),
    (archive_errors.StorageFailure, 500, "storage_failure"),
    (AuditStoreUnavailable, 503, "audit_unavailable"),
]


def create_app(services: VaultServices, console_dir: str | Path | None = None) -> FastAPI:
    # the generated manifest at /api/v1/openapi.json doubles as the route docs
    app = FastAPI(title="dicomvault", version="0.1.0",
                  openapi_url="/api/v1/openapi.json", docs_url="/api/v1/docs",
                  redoc_url=None)
    app.state.services = services

    app.include_router(auth_router, prefix="/auth")
    app.include_router(dicomweb_router, prefix="/dicomweb")
    app.include_router(fallback_router, prefix="/dicomweb")
    app.include_router(mgmt_router, prefix="/api/v1")

    @app.get("/health")
    def health(request: Request):
        request.state.audit_category = "SYSTEM"
        request.state.audit_operation = "GET"
        return {
            "status": "ok",
            "rbac_mode": services.rbac_mode,
            "requests_handled": services.requests_handled,
            "audit_records": services.audit.count(),
            "audit_dropped": services.audit.dropped,
            "instances": services.archive.instance_count(),
        }

    for exc_type, status, code in _ERROR_STATUS:
        def _handler(request: Request, exc: Exception, status=status, code=code):
            return JSONResponse(status_code=status,
                                content={"detail": {"code": code, "message": str(exc)}})
        app.add_exception_handler(exc_type, _handler)

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=str(console_dir), html=True),
                  name="console")

    app.add_middleware(AuditMiddleware, services=services)
    return app
