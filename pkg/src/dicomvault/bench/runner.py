"""Drive STOW/QIDO/WADO against a running server in open and protected modes.

The request plan is a pure function of (scenario, seed): both modes replay
the identical sequence so per-request response digests are comparable, which
is how the open/protected body-equivalence check works. Timed requests go
over a bare persistent HTTP/1.1 connection to keep client overhead out of
the latency numbers; management calls use a regular httpx client.
"""

from __future__ import annotations

import hashlib
import http.client
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from urllib.parse import urlsplit

import httpx

from ..server.multipart import build_multipart_related, parse_multipart_related
from .corpus import CorpusEntry, generate_corpus, load_manifest
from .scenario import Scenario


class TargetUnreachable(Exception):
    pass


class NonSuccessThresholdExceeded(Exception):
    pass


@dataclass(frozen=True)
class LogRow:
    service: str
    mode: str          # "open" | "protected"
    request_id: str
    status: int
    wait_ms: float
    body_digest: str


@dataclass(frozen=True)
class PlannedRequest:
    request_id: str
    method: str
    url: str
    content: bytes | None = None
    content_type: str | None = None


def _digest(content: bytes, content_type: str) -> str:
    """Semantic body digest: multipart parts only, so boundary churn cancels."""
    if content_type.startswith("multipart/related"):
        try:
            parts = parse_multipart_related(content, content_type)
        except Exception:
            return hashlib.sha256(content).hexdigest()
        h = hashlib.sha256()
        for part in parts:
            h.update(part.content)
        return h.hexdigest()
    return hashlib.sha256(content).hexdigest()


def _ensure_corpus(scenario: Scenario) -> list[CorpusEntry]:
    manifest = scenario.corpus_dir / "manifest.json"
    if manifest.exists():
        return load_manifest(scenario.corpus_dir)
    return generate_corpus(scenario.corpus, scenario.corpus_dir)


def _qido_plan(scenario: Scenario, entries: list[CorpusEntry]) -> list[PlannedRequest]:
    """Queries at each hierarchy level, mixing identifier and modality parameters."""
    rng = random.Random(scenario.seed)
    plan = []
    for rep in range(scenario.repetitions):
        for level in scenario.qido_levels:
            entry = rng.choice(entries)
            if level == "PATIENT":
                url = f"/dicomweb/studies?PatientID={entry.patient}"
            elif level == "STUDY":
                if rep % 2:
                    url = f"/dicomweb/studies?Modality={entry.modality}"
                else:
                    url = f"/dicomweb/studies?StudyInstanceUID={entry.study}"
            elif level == "SERIES":
                url = f"/dicomweb/studies/{entry.study}/series?SeriesInstanceUID={entry.series}"
            else:
                url = f"/dicomweb/instances?SOPInstanceUID={entry.sop}"
            plan.append(PlannedRequest(f"{level.lower()}:{rep}:{entry.sop}", "GET", url))
    return plan


def _wado_plan(scenario: Scenario, entries: list[CorpusEntry]) -> list[PlannedRequest]:
    rng = random.Random(scenario.seed)
    count = min(scenario.wado_identifiers, len(entries))
    chosen = rng.sample(entries, count)
    plan = []
    for rep in range(scenario.repetitions):
        for entry in chosen:
            url = (f"/dicomweb/studies/{entry.study}/series/{entry.series}"
                   f"/instances/{entry.sop}/frames/1")
            plan.append(PlannedRequest(f"wado:{rep}:{entry.sop}", "GET", url))
    return plan


def _stow_requests(scenario: Scenario, entries: list[CorpusEntry],
                   rep: int) -> list[PlannedRequest]:
    plan = []
    for entry in entries:
        blob = (scenario.corpus_dir / entry.file).read_bytes()
        body, content_type = build_multipart_related([("application/dicom", blob)],
                                                     "application/dicom")
        plan.append(PlannedRequest(f"stow:{rep}:{entry.file}", "POST", "/dicomweb/studies",
                                   body, content_type))
    return plan


class BenchClient:
    """Management calls over httpx plus a bare keep-alive connection for the
    timed stream.

    Counts every completed response, so a run knows exactly how many requests
    the server handled on its behalf (the audit-completeness check relies on it).
    """

    def __init__(self, target: str, timeout: float = 60.0):
        self.responses_seen = 0

        def _count(response) -> None:
            self.responses_seen += 1

        self.http = httpx.Client(base_url=target, timeout=timeout,
                                 event_hooks={"response": [_count]})
        self.target = target
        split = urlsplit(target)
        self._raw_host = split.hostname or "127.0.0.1"
        self._raw_port = split.port or 80
        self._raw: http.client.HTTPConnection | None = None
        self._timeout = timeout

    def raw_request(self, method: str, url: str, body: bytes | None,
                    headers: dict) -> tuple[int, str, bytes, float]:
        """(status, content type, body, wall milliseconds) over the bare connection."""
        if self._raw is None:
            self._raw = http.client.HTTPConnection(self._raw_host, self._raw_port,
                                                   timeout=self._timeout)
        try:
            start = time.perf_counter()
            self._raw.request(method, url, body=body, headers=headers)
            response = self._raw.getresponse()
            content = response.read()
            elapsed = (time.perf_counter() - start) * 1000.0
        except (http.client.HTTPException, OSError):
            self._raw.close()
            self._raw = None
            raise
        self.responses_seen += 1
        return response.status, response.getheader("content-type", "") or "", content, elapsed

    def close(self):
        self.http.close()
        if self._raw is not None:
            self._raw.close()

    def check_reachable(self) -> None:
        try:
            response = self.http.get("/health")
        except httpx.HTTPError as exc:
            raise TargetUnreachable(f"{self.target}: {exc}") from exc
        if response.status_code != 200:
            raise TargetUnreachable(f"{self.target}: health returned {response.status_code}")

    def login(self, username: str, password: str) -> str:
        response = self.http.post("/auth/login",
                                  json={"username": username, "password": password})
        if response.status_code != 200:
            raise TargetUnreachable(f"login as {username} failed: {response.status_code}")
        return response.json()["token"]

    def mgmt(self, method: str, path: str, token: str, **kw) -> httpx.Response:
        response = self.http.request(method, path,
                                     headers={"Authorization": f"Bearer {token}"}, **kw)
        if response.status_code >= 400:
            raise RuntimeError(f"{method} {path} -> {response.status_code}: {response.text}")
        return response

    def set_rbac_mode(self, token: str, enabled: bool) -> None:
        self.mgmt("PUT", "/api/v1/settings", token, json={"rbac_mode": enabled})

    def reset_archive(self, token: str) -> None:
        self.mgmt("POST", "/api/v1/maintenance/reset-archive", token)


def _find_or_create(client: BenchClient, token: str, list_path: str, match: dict,
                    create_path: str, payload: dict) -> dict:
    for row in client.mgmt("GET", list_path, token).json():
        if all(row.get(k) == v for k, v in match.items()):
            return row
    return client.mgmt("POST", create_path, token, json=payload).json()


def provision_profile(client: BenchClient, admin_token: str, scenario: Scenario) -> dict:
    """Create (or reuse) the bench org, facilities, grant role, and user."""
    profile = scenario.user_profile
    org = _find_or_create(client, admin_token, "/api/v1/organizations",
                          {"name": profile.organization},
                          "/api/v1/organizations", {"name": profile.organization})
    facilities = []
    for i in range(profile.facility_count):
        name = f"{profile.organization}-fac-{i}"
        facilities.append(_find_or_create(
            client, admin_token, "/api/v1/facilities?organization_id=" + org["id"],
            {"name": name}, "/api/v1/facilities",
            {"organization_id": org["id"], "name": name}))
    role = _find_or_create(client, admin_token, "/api/v1/roles?organization_id=" + org["id"],
                           {"name": f"{profile.organization}-role"}, "/api/v1/roles",
                           {"organization_id": org["id"],
                            "name": f"{profile.organization}-role"})
    for operation in profile.grant_recipe:
        client.mgmt("POST", f"/api/v1/roles/{role['id']}/permissions", admin_token,
                    json={"operation": operation, "category": "RESOURCE",
                          "scope": profile.scope})
    if profile.random_permission_count:
        rng = random.Random(scenario.seed * 7919 + 11)
        now = time.time()
        modality_pool = [None, ["CT"], ["MR", "US"], ["XA", "CR"], ["CT", "MR", "CR"]]
        window_pool = [None, (now - 86_400, now + 86_400),
                       (now - 172_800, now - 86_400), (now + 86_400, now + 172_800)]
        for _ in range(profile.random_permission_count):
            window = rng.choice(window_pool)
            payload = {"operation": rng.choice(["GET", "LIST"]), "category": "RESOURCE",
                       "scope": rng.choice(["OWN_FACILITIES", "ORGANIZATION"]),
                       "modality_filter": rng.choice(modality_pool)}
            if window:
                payload["valid_from"], payload["valid_to"] = window
            client.mgmt("POST", f"/api/v1/roles/{role['id']}/permissions", admin_token,
                        json=payload)
    user = _find_or_create(client, admin_token, "/api/v1/users?organization_id=" + org["id"],
                           {"username": profile.username}, "/api/v1/users",
                           {"username": profile.username, "password": profile.password,
                            "organization_id": org["id"],
                            "facility_ids": [f["id"] for f in facilities],
                            "role_ids": [role["id"]]})
    return user


def _issue(client: BenchClient, planned: PlannedRequest,
           headers: dict) -> tuple[int, str, bytes, float]:
    extra = dict(headers)
    if planned.content_type:
        extra["Content-Type"] = planned.content_type
    return client.raw_request(planned.method, planned.url, planned.content, extra)


def _check_threshold(rows: list[LogRow], label: str) -> None:
    failures = sum(1 for row in rows if not 200 <= row.status < 300)
    if rows and failures / len(rows) > 0.01:
        raise NonSuccessThresholdExceeded(
            f"{failures}/{len(rows)} non-2xx responses in {label} run")


def _run_plan(client: BenchClient, plan: list[PlannedRequest], headers: dict,
              service: str, mode: str, concurrency: int,
              enforce_threshold: bool = True) -> list[LogRow]:
    def one(planned: PlannedRequest) -> LogRow:
        status, content_type, content, ms = _issue(client, planned, headers)
        return LogRow(service, mode, planned.request_id, status, ms,
                      _digest(content, content_type))

    if concurrency <= 1:
        rows = [one(planned) for planned in plan]
    else:
        # optional extension beyond the sequential reference protocol
        import threading

        local = threading.local()
        lock = threading.Lock()

        def one_concurrent(planned: PlannedRequest) -> LogRow:
            conn = getattr(local, "conn", None)
            if conn is None:
                conn = http.client.HTTPConnection(client._raw_host, client._raw_port,
                                                  timeout=60)
                local.conn = conn
            extra = dict(headers)
            if planned.content_type:
                extra["Content-Type"] = planned.content_type
            start = time.perf_counter()
            conn.request(planned.method, planned.url, body=planned.content, headers=extra)
            response = conn.getresponse()
            content = response.read()
            elapsed = (time.perf_counter() - start) * 1000.0
            with lock:
                client.responses_seen += 1
            return LogRow(service, mode, planned.request_id, response.status, elapsed,
                          _digest(content, response.getheader("content-type", "") or ""))

        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            rows = list(pool.map(one_concurrent, plan))
    if enforce_threshold:
        _check_threshold(rows, f"{mode} {service}")
    return rows


def run_phase(client: BenchClient, scenario: Scenario, admin_token: str,
              entries: list[CorpusEntry], protected: bool) -> list[LogRow]:
    """One full measurement pass in a single mode against a reset archive."""
    mode = "protected" if protected else "open"
    client.set_rbac_mode(admin_token, protected)
    client.reset_archive(admin_token)
    headers = {}
    if protected:
        token = client.login(scenario.user_profile.username, scenario.user_profile.password)
        headers = {"Authorization": f"Bearer {token}"}

    if scenario.service == "STOW":
        warm = _stow_requests(scenario, entries[: scenario.warmup_requests], rep=-1)
        for planned in warm:
            _issue(client, planned, headers)
        client.reset_archive(admin_token)
        rows: list[LogRow] = []
        for rep in range(scenario.repetitions):
            if rep > 0:
                client.reset_archive(admin_token)
            rows += _run_plan(client, _stow_requests(scenario, entries, rep), headers,
                              "STOW", mode, scenario.concurrency)
        return rows

    # QIDO and WADO measure against a corpus stowed up front (untimed)
    for planned in _stow_requests(scenario, entries, rep=0):
        status, _, _, _ = _issue(client, planned, headers)
        if status != 200:
            raise TargetUnreachable(f"setup stow failed: {status}")
    plan = (_qido_plan if scenario.service == "QIDO" else _wado_plan)(scenario, entries)
    for planned in plan[: scenario.warmup_requests]:
        _issue(client, planned, headers)
    return _run_plan(client, plan, headers, scenario.service, mode, scenario.concurrency)


def run_read_comparison(client: BenchClient, scenario: Scenario, admin_token: str,
                        entries: list[CorpusEntry], block_size: int = 25) -> list[LogRow]:
    """A/B pass for the read services: one stowed corpus, the same plan issued
    once per mode in alternating blocks (default: per request) so cache drift
    and noise bursts land on both modes evenly.

    The dataset is provisioned once under the bench user; the open blocks
    simply skip the filter (and carry no token), exactly the toggled-off
    server behavior.
    """
    client.set_rbac_mode(admin_token, True)
    client.reset_archive(admin_token)
    token = client.login(scenario.user_profile.username, scenario.user_profile.password)
    protected_headers = {"Authorization": f"Bearer {token}"}
    for planned in _stow_requests(scenario, entries, rep=0):
        status, _, _, _ = _issue(client, planned, protected_headers)
        if status != 200:
            raise TargetUnreachable(f"setup stow failed: {status}")

    plan = (_qido_plan if scenario.service == "QIDO" else _wado_plan)(scenario, entries)
    # warm both paths end to end before timing anything
    for enabled, headers in ((True, protected_headers), (False, {})):
        client.set_rbac_mode(admin_token, enabled)
        for planned in plan[: scenario.warmup_requests]:
            _issue(client, planned, headers)

    rows: list[LogRow] = []
    chunks = [plan[i : i + block_size] for i in range(0, len(plan), block_size)]
    for index, chunk in enumerate(chunks):
        order = [False, True] if index % 2 == 0 else [True, False]
        for protected in order:
            client.set_rbac_mode(admin_token, protected)
            rows += _run_plan(client, chunk,
                              protected_headers if protected else {},
                              scenario.service, "protected" if protected else "open",
                              scenario.concurrency, enforce_threshold=False)
    client.set_rbac_mode(admin_token, True)
    for mode in ("open", "protected"):
        _check_threshold([r for r in rows if r.mode == mode], f"{mode} {scenario.service}")
    return rows


def run_scenario(scenario: Scenario, target: str):
    """Execute the scenario; returns a BenchReport (both modes when requested)."""
    from .report import BenchReport

    entries = _ensure_corpus(scenario)
    client = BenchClient(target)
    try:
        client.check_reachable()
        admin_token = client.login(scenario.admin_username, scenario.admin_password)
        provision_profile(client, admin_token, scenario)
        rows: list[LogRow] = []
        if scenario.rbac_mode == "both" and scenario.service in ("QIDO", "WADO"):
            rows = run_read_comparison(client, scenario, admin_token, entries)
        else:
            if scenario.rbac_mode in ("off", "both"):
                rows += run_phase(client, scenario, admin_token, entries, protected=False)
            if scenario.rbac_mode in ("on", "both"):
                rows += run_phase(client, scenario, admin_token, entries, protected=True)
        report = BenchReport.from_rows(scenario.name, scenario.service, rows)
        report.client_requests = client.responses_seen
        return report
    finally:
        client.close()
