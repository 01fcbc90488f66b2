"""Bearer session tokens: issue on login, sliding expiry, immediate invalidation."""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass


@dataclass
class SessionToken:
    token: str
    user_id: str
    issued_at: float
    expires_at: float


class TokenStore:
    def __init__(self, ttl_seconds: float = 1800.0):
        self.ttl = ttl_seconds
        self._tokens: dict[str, SessionToken] = {}
        self._lock = threading.Lock()

    def issue(self, user_id: str, now: float | None = None) -> SessionToken:
        now = time.time() if now is None else now
        token = SessionToken(secrets.token_hex(16), user_id, now, now + self.ttl)
        with self._lock:
            self._tokens[token.token] = token
        return token

    def resolve(self, token: str, now: float | None = None) -> str | None:
        """User id for a live token; use slides the expiry forward."""
        now = time.time() if now is None else now
        with self._lock:
            record = self._tokens.get(token)
            if record is None:
                return None
            if now >= record.expires_at:
                del self._tokens[token]
                return None
            record.expires_at = now + self.ttl
            return record.user_id

    def invalidate(self, token: str) -> bool:
        with self._lock:
            return self._tokens.pop(token, None) is not None

    def invalidate_user(self, user_id: str) -> int:
        with self._lock:
            doomed = [t for t, rec in self._tokens.items() if rec.user_id == user_id]
            for t in doomed:
                del self._tokens[t]
            return len(doomed)
