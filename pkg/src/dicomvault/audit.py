"""Append-only request trail, stored apart from operational data.

Records are enqueued on the request path and flushed by a single writer
thread, so logging never stalls traffic. By default a full queue or broken
store degrades to a counted loss; strict mode writes synchronously and lets
the failure propagate instead.
"""

from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .db import Database


class AuditStoreUnavailable(Exception):
    pass


class MalformedFilter(Exception):
    pass


@dataclass(frozen=True)
class AuditRecord:
    timestamp: float
    user_id: str
    username: str
    request_url: str
    parameters: dict[str, str]
    category: str
    operation: str
    status: int
    user_agent: str
    client_ip: str


_SCHEMA = """
CREATE TABLE IF NOT EXISTS audit_records (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    timestamp REAL NOT NULL,
    user_id TEXT NOT NULL DEFAULT '',
    username TEXT NOT NULL DEFAULT '',
    request_url TEXT NOT NULL,
    parameters TEXT NOT NULL DEFAULT '{}',
    category TEXT NOT NULL DEFAULT '',
    operation TEXT NOT NULL DEFAULT '',
    status INTEGER NOT NULL,
    user_agent TEXT NOT NULL DEFAULT '',
    client_ip TEXT NOT NULL DEFAULT ''
);
"""

_FILTER_COLUMNS = {"user_id", "username", "category", "operation", "status", "client_ip"}


class AuditLog:
    def __init__(self, path: str | Path = ":memory:", strict: bool = False,
                 queue_size: int = 10_000):
        self.db = Database(path)
        self.db.executescript(_SCHEMA)
        self.strict = strict
        self.dropped = 0
        self._ts_lock = threading.Lock()
        self._last_ts = 0.0
        self._queue: queue.Queue = queue.Queue(maxsize=queue_size)
        self._writer = threading.Thread(target=self._drain, name="audit-writer", daemon=True)
        self._closed = False
        self._writer.start()

    # -- producing ---------------------------------------------------------

    def record(self, *, user_id: str = "", username: str = "", request_url: str,
               parameters: dict[str, str] | None = None, category: str = "",
               operation: str = "", status: int, user_agent: str = "",
               client_ip: str = "") -> None:
        with self._ts_lock:
            ts = max(time.time(), self._last_ts)
            self._last_ts = ts
            evt = AuditRecord(ts, user_id, username, request_url, parameters or {},
                              category, operation, int(status), user_agent, client_ip)
            if self.strict:
                try:
                    self._insert(evt)
                except Exception as exc:
                    raise AuditStoreUnavailable(str(exc)) from exc
                return
            # enqueue under the same lock so queue order follows the timestamps
            try:
                self._queue.put_nowait(evt)
            except queue.Full:
                self.dropped += 1

    def _insert(self, *events: AuditRecord) -> None:
        with self.db.tx() as conn:
            conn.executemany(
                "INSERT INTO audit_records (timestamp, user_id, username, request_url,"
                " parameters, category, operation, status, user_agent, client_ip)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [(evt.timestamp, evt.user_id, evt.username, evt.request_url,
                  json.dumps(evt.parameters), evt.category, evt.operation, evt.status,
                  evt.user_agent, evt.client_ip) for evt in events])

    def _drain(self) -> None:
        while True:
            items = [self._queue.get()]
            # one transaction per burst keeps commit churn off the request path
            while len(items) < 256:
                try:
                    items.append(self._queue.get_nowait())
                except queue.Empty:
                    break
            closing = any(item is None for item in items)
            events = [item for item in items if item is not None]
            try:
                if events:
                    self._insert(*events)
            except Exception:
                self.dropped += len(events)
            finally:
                for _ in items:
                    self._queue.task_done()
            if closing:
                return

    def flush(self) -> None:
        """Block until everything enqueued so far is durably written."""
        self._queue.join()

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            self._queue.put(None)
            self._writer.join(timeout=5)

    # -- reviewing ----------------------------------------------------------

    def query(self, filters: dict | None = None, since: float | None = None,
              until: float | None = None, limit: int = 100, offset: int = 0
              ) -> list[AuditRecord]:
        """Conjunction of equality filters and a time range, newest first."""
        clauses, params = [], []
        for key, value in (filters or {}).items():
            if key not in _FILTER_COLUMNS:
                raise MalformedFilter(f"unknown filter {key}")
            if key == "status":
                try:
                    value = int(value)
                except (TypeError, ValueError) as exc:
                    raise MalformedFilter("status must be an integer") from exc
            clauses.append(f"{key} = ?")
            params.append(value)
        if since is not None and until is not None and since > until:
            raise MalformedFilter("time range is inverted")
        if since is not None:
            clauses.append("timestamp >= ?")
            params.append(float(since))
        if until is not None:
            clauses.append("timestamp < ?")
            params.append(float(until))
        if limit < 0 or offset < 0:
            raise MalformedFilter("negative paging values")
        sql = "SELECT * FROM audit_records"
        if clauses:
            sql += " WHERE " + " AND ".join(clauses)
        sql += " ORDER BY seq DESC LIMIT ? OFFSET ?"
        params += [limit, offset]
        return [self._from_row(r) for r in self.db.query(sql, tuple(params))]

    @staticmethod
    def _from_row(row) -> AuditRecord:
        return AuditRecord(
            timestamp=row["timestamp"], user_id=row["user_id"], username=row["username"],
            request_url=row["request_url"], parameters=json.loads(row["parameters"]),
            category=row["category"], operation=row["operation"], status=row["status"],
            user_agent=row["user_agent"], client_ip=row["client_ip"])

    def count(self) -> int:
        return self.db.scalar("SELECT COUNT(*) FROM audit_records")

    def export_ndjson(self, fp) -> int:
        """Oldest-first newline-delimited JSON dump for offline review."""
        rows = self.db.query("SELECT * FROM audit_records ORDER BY seq")
        for row in rows:
            fp.write(json.dumps(asdict(self._from_row(row))) + "\n")
        return len(rows)
