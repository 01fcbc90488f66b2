"""Shared service container: stores, engine, archive, audit, sessions, counters."""

from __future__ import annotations

import threading

from ..archive import Archive, BlobStore
from ..audit import AuditLog
from ..config import ServerConfig
from ..db import Database
from ..rbac import Category, Operation, RbacEngine, RbacStore, Scope
from .auth import TokenStore


class VaultServices:
    def __init__(self, config: ServerConfig):
        self.config = config
        config.data_dir.mkdir(parents=True, exist_ok=True)
        self.db = Database(config.data_dir / "vault.db")
        self.rbac_store = RbacStore(self.db)
        self.engine = RbacEngine(self.rbac_store)
        self.archive = Archive(self.db, BlobStore(config.data_dir / "blobs"),
                               self.rbac_store, self.engine,
                               max_limit=config.max_query_limit)
        self.audit = AuditLog(config.data_dir / "audit.db", strict=config.audit_strict,
                              queue_size=config.audit_queue_size)
        self.tokens = TokenStore(config.token_ttl_seconds)
        self.rbac_mode = config.rbac_mode
        self.requests_handled = 0
        self._counter_lock = threading.Lock()
        self._bootstrap()

    def count_request(self) -> None:
        with self._counter_lock:
            self.requests_handled += 1

    def _bootstrap(self) -> None:
        """First start seeds a super-administrator holding GLOBAL grants everywhere."""
        if self.rbac_store.db.one("SELECT 1 FROM users LIMIT 1"):
            return
        org = self.rbac_store.create_organization("system")
        self.rbac_store.create_facility(org.id, "core")
        role = self.rbac_store.create_role(org.id, "superadmin")
        for operation in Operation:
            for category in Category:
                self.rbac_store.add_permission(role.id, operation, category, Scope.GLOBAL)
        admin = self.rbac_store.create_user(self.config.admin_username,
                                            self.config.admin_password, org.id,
                                            email=self.config.admin_email)
        self.rbac_store.assign_role(admin.id, role.id)

    def close(self) -> None:
        self.audit.close()
        self.db.close()
