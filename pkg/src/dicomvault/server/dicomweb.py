"""STOW-RS, QIDO-RS, and WADO-RS endpoints plus login/logout token minting."""

from __future__ import annotations

import time
from typing import Any

from fastapi import APIRouter, Depends, HTTPException, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from ..archive import Forbidden, MalformedQuery, NotFound, Query, QueryLevel
from ..archive.errors import DuplicateSOPInstanceUID, StorageFailure
from ..dicom import DicomError, extract_frame, parse_part10
from ..dicom.errors import FrameOutOfRange, UnsupportedTransferSyntax
from ..dicom.tags import DicomTag, KEYWORD_TO_TAG, SOP_CLASS_UID, keyword_of
from ..rbac import Category, Operation
from .deps import dicomweb_fallback_guard, dicomweb_guard, get_services
from .multipart import MultipartError, build_multipart_related, parse_multipart_related

router = APIRouter(dependencies=[Depends(dicomweb_guard)])
fallback_router = APIRouter(dependencies=[Depends(dicomweb_fallback_guard)])
auth_router = APIRouter()

_FAILURE_PROCESSING = 0x0110
_FAILURE_DUPLICATE = 0x0111
_FAILURE_BAD_PART = 0x0122


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


# -- authentication ---------------------------------------------------------


class LoginBody(BaseModel):
    username: str
    password: str


@auth_router.post("/login")
def login(payload: LoginBody, request: Request):
    request.state.audit_category = "AUTHENTICATION"
    request.state.audit_operation = "LOGIN"
    services = get_services(request)
    user = services.rbac_store.verify_credentials(payload.username, payload.password)
    if user is None:
        raise _error(401, "bad_credentials", "unknown user or wrong password")
    request.state.audit_user_id = user.id
    request.state.audit_username = user.username
    token = services.tokens.issue(user.id)
    return {"token": token.token, "user_id": user.id, "username": user.username,
            "expires_at": token.expires_at}


@auth_router.post("/logout")
def logout(request: Request):
    request.state.audit_category = "AUTHENTICATION"
    request.state.audit_operation = "LOGOUT"
    services = get_services(request)
    header = request.headers.get("authorization", "")
    scheme, _, credential = header.partition(" ")
    if scheme.lower() != "bearer" or not credential.strip():
        raise _error(401, "malformed_token", "expected 'Authorization: Bearer <token>'")
    if not services.tokens.invalidate(credential.strip()):
        raise _error(401, "invalid_token", "token unknown or expired")
    return {"logged_out": True}


# -- STOW-RS -----------------------------------------------------------------


def _stow_failure(code: int, sop_uid: str | None) -> dict[str, Any]:
    entry: dict[str, Any] = {"00081197": {"vr": "US", "Value": [code]}}
    if sop_uid:
        entry["00081155"] = {"vr": "UI", "Value": [sop_uid]}
    return entry


@router.post("/studies")
async def stow(request: Request):
    request.state.audit_operation = "ADD"
    services = get_services(request)
    user = request.state.user
    now = time.time()
    if user is not None:
        decision = services.engine.authorize(user.id, Operation.ADD, Category.RESOURCE,
                                             None, now)
        if not decision.allowed:
            raise _error(403, "forbidden", f"ADD denied: {decision.reason.value}")

    body = await request.body()
    try:
        parts = parse_multipart_related(body, request.headers.get("content-type", ""))
    except MultipartError as exc:
        raise _error(400, "malformed_multipart", str(exc))
    if not parts:
        raise _error(400, "malformed_multipart", "no parts in payload")

    successes, failures = [], []
    for part in parts:
        content_type = part.headers.get("content-type", "application/dicom")
        if "application/dicom" not in content_type:
            failures.append(_stow_failure(_FAILURE_BAD_PART, None))
            continue
        try:
            obj = parse_part10(part.content)
            stored = services.archive.store_instance(
                obj, part.content, user.id if user else None, now)
        except DuplicateSOPInstanceUID as exc:
            failures.append(_stow_failure(_FAILURE_DUPLICATE, str(exc)))
            continue
        except (DicomError, StorageFailure):
            failures.append(_stow_failure(_FAILURE_PROCESSING, None))
            continue
        ref = {
            "00081155": {"vr": "UI", "Value": [stored.sop_instance_uid]},
            "00081190": {"vr": "UR", "Value": [
                f"/dicomweb/studies/{stored.study_uid}/series/{stored.series_uid}"
                f"/instances/{stored.sop_instance_uid}"]},
        }
        sop_class = obj.string(SOP_CLASS_UID)
        if sop_class:
            ref["00081150"] = {"vr": "UI", "Value": [sop_class]}
        successes.append(ref)

    manifest: dict[str, Any] = {"00081190": {"vr": "UR", "Value": ["/dicomweb/studies"]}}
    if successes:
        manifest["00081199"] = {"vr": "SQ", "Value": successes}
    if failures:
        manifest["00081198"] = {"vr": "SQ", "Value": failures}
    return JSONResponse(manifest, media_type="application/dicom+json")


# -- QIDO-RS -----------------------------------------------------------------


def _attribute_keyword(name: str) -> str:
    """Query-parameter name to dictionary keyword; tags translate, the rest pass through."""
    try:
        tag = DicomTag.parse(name)
    except ValueError:
        return name
    return keyword_of(tag) or name


def _run_qido(request: Request, level: QueryLevel, bound: dict[str, str]) -> JSONResponse:
    request.state.audit_operation = "LIST"
    services = get_services(request)
    user = request.state.user
    filters: dict[str, str] = {}
    requested: set[str] = set()
    limit, offset = services.config.default_query_limit, 0
    ignored: list[str] = []
    for key, value in request.query_params.multi_items():
        if key == "limit":
            try:
                limit = int(value)
            except ValueError:
                raise _error(400, "malformed_query", f"limit {value!r} is not an integer")
        elif key == "offset":
            try:
                offset = int(value)
            except ValueError:
                raise _error(400, "malformed_query", f"offset {value!r} is not an integer")
        elif key == "includefield":
            for name in value.split(","):
                name = name.strip()
                if name.lower() == "all":
                    requested.update(KEYWORD_TO_TAG)
                elif name:
                    requested.add(_attribute_keyword(name))
        elif key == "fuzzymatching":
            ignored.append(key)
        elif key[0].isupper() or key[0].isdigit():
            filters[_attribute_keyword(key)] = value
        else:
            ignored.append(key)
    filters.update(bound)

    query = Query(level, filters, requested or None, offset, limit)
    try:
        result = services.archive.query(query, user.id if user else None, time.time(),
                                        enforce_permissions=services.rbac_mode)
    except MalformedQuery as exc:
        raise _error(400, "malformed_query", str(exc))
    headers = {}
    warnings = result.warnings + [f"ignored parameter {name}" for name in ignored]
    if warnings:
        headers["Warning"] = "; ".join(f'299 dicomvault "{w}"' for w in warnings)
    return JSONResponse(result.rows, media_type="application/dicom+json", headers=headers)


@router.get("/studies")
def qido_studies(request: Request):
    return _run_qido(request, QueryLevel.STUDY, {})


@router.get("/studies/{study_uid}/series")
def qido_series(study_uid: str, request: Request):
    return _run_qido(request, QueryLevel.SERIES, {"StudyInstanceUID": study_uid})


@router.get("/studies/{study_uid}/series/{series_uid}/instances")
def qido_instances_in_series(study_uid: str, series_uid: str, request: Request):
    return _run_qido(request, QueryLevel.INSTANCE,
                     {"StudyInstanceUID": study_uid, "SeriesInstanceUID": series_uid})


@router.get("/instances")
def qido_instances(request: Request):
    return _run_qido(request, QueryLevel.INSTANCE, {})


# -- WADO-RS -----------------------------------------------------------------


def _locate_checked(request: Request, study_uid: str, series_uid: str, sop_uid: str):
    services = get_services(request)
    user = request.state.user
    try:
        stored, _ = services.archive.locate(sop_uid, user.id if user else None, time.time(),
                                            enforce_permissions=services.rbac_mode)
    except NotFound:
        raise _error(404, "not_found", f"no instance {sop_uid}")
    except Forbidden as exc:
        raise _error(403, "forbidden", str(exc))
    if stored.study_uid != study_uid or stored.series_uid != series_uid:
        raise _error(404, "not_found", "instance exists under a different study/series path")
    return services, stored


@router.get("/studies/{study_uid}/series/{series_uid}/instances/{sop_uid}")
def wado_instance(study_uid: str, series_uid: str, sop_uid: str, request: Request):
    request.state.audit_operation = "GET"
    services, stored = _locate_checked(request, study_uid, series_uid, sop_uid)
    blob = services.archive.read_bytes(stored)
    body, content_type = build_multipart_related([("application/dicom", blob)],
                                                 "application/dicom")
    return Response(content=body, headers={"Content-Type": content_type})


@router.get("/studies/{study_uid}/series/{series_uid}/instances/{sop_uid}/frames/{frame_list}")
def wado_frames(study_uid: str, series_uid: str, sop_uid: str, frame_list: str,
                request: Request):
    request.state.audit_operation = "GET"
    try:
        indexes = [int(piece) for piece in frame_list.split(",") if piece != ""]
    except ValueError:
        indexes = []
    if not indexes or any(i < 1 for i in indexes):
        raise _error(400, "malformed_frame_list", f"bad frame list {frame_list!r}")
    services, stored = _locate_checked(request, study_uid, series_uid, sop_uid)
    blob = services.archive.read_bytes(stored)
    obj = parse_part10(blob)
    frames = []
    for index in indexes:
        try:
            frames.append(("application/octet-stream", extract_frame(obj, blob, index)))
        except FrameOutOfRange as exc:
            raise _error(400, "frame_out_of_range", str(exc))
        except UnsupportedTransferSyntax as exc:
            raise _error(409, "unsupported_transfer_syntax", str(exc))
    body, content_type = build_multipart_related(frames, "application/octet-stream")
    return Response(content=body, headers={"Content-Type": content_type})


# -- invalid-service fallback --------------------------------------------------


@fallback_router.api_route("/{rest:path}",
                           methods=["GET", "POST", "PUT", "DELETE", "PATCH"])
def invalid_service(rest: str, request: Request):
    raise _error(400, "invalid_service", f"no DICOMWeb service at /dicomweb/{rest}")
