"""Request accounting: every HTTP request leaves exactly one audit record.

Handlers annotate `request.state` with the resolved user and the
category/operation labels; this middleware reads them back out of the ASGI
scope once the response status is known. In strict audit mode the record is
written synchronously before the response starts, and a failing audit store
turns the response into a 503 instead of silently losing the trail.
"""

from __future__ import annotations

import json
from urllib.parse import parse_qsl

from ..audit import AuditStoreUnavailable
from .services import VaultServices

_UNAVAILABLE_BODY = json.dumps(
    {"detail": {"code": "audit_unavailable", "message": "audit store rejected the record"}}
).encode()


class AuditMiddleware:
    def __init__(self, app, services: VaultServices):
        self.app = app
        self.services = services

    async def __call__(self, scope, receive, send):
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return
        scope.setdefault("state", {})
        outcome = {"status": 500, "recorded": False, "suppressed": False}

        def write_record(status: int) -> None:
            state = scope.get("state", {})
            params = {}
            for key, value in parse_qsl(scope.get("query_string", b"").decode("latin-1")):
                params[key] = f"{params[key]},{value}" if key in params else value
            headers = {name.decode("latin-1").lower(): value.decode("latin-1")
                       for name, value in scope.get("headers", [])}
            client = scope.get("client")
            self.services.audit.record(
                user_id=state.get("audit_user_id", ""),
                username=state.get("audit_username", ""),
                request_url=scope.get("path", ""),
                parameters=params,
                category=state.get("audit_category", ""),
                operation=state.get("audit_operation", ""),
                status=status,
                user_agent=headers.get("user-agent", ""),
                client_ip=client[0] if client else "",
            )
            outcome["recorded"] = True

        async def send_wrapper(message):
            if outcome["suppressed"]:
                return
            if message["type"] == "http.response.start":
                outcome["status"] = message["status"]
                if self.services.audit.strict:
                    try:
                        write_record(message["status"])
                    except AuditStoreUnavailable:
                        outcome["suppressed"] = True
                        outcome["recorded"] = True  # nothing stored; do not retry in finally
                        outcome["status"] = 503
                        await send({
                            "type": "http.response.start", "status": 503,
                            "headers": [(b"content-type", b"application/json"),
                                        (b"content-length", str(len(_UNAVAILABLE_BODY)).encode())],
                        })
                        await send({"type": "http.response.body", "body": _UNAVAILABLE_BODY})
                        return
            await send(message)

        try:
            await self.app(scope, receive, send_wrapper)
        finally:
            self.services.count_request()
            if not outcome["recorded"]:
                try:
                    write_record(outcome["status"])
                except AuditStoreUnavailable:
                    pass
