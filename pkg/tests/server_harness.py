"""Run the real server on an ephemeral localhost port for driver tests."""

from __future__ import annotations

import os
import socket
import subprocess
import sys
import threading
import time

import httpx
import uvicorn

from dicomvault.config import ServerConfig
from dicomvault.server import VaultServices, create_app


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    def __init__(self, data_dir, rbac_mode: bool = True, **config_kw):
        port = free_port()
        self.config = ServerConfig(data_dir=data_dir, host="127.0.0.1", port=port,
                                   rbac_mode=rbac_mode, admin_password="adminpw",
                                   **config_kw)
        self.services = VaultServices(self.config)
        app = create_app(self.services)
        self._server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port,
                                                     log_level="error"))
        self._thread = threading.Thread(target=self._server.run, daemon=True)

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.config.port}"

    def start(self, timeout: float = 10.0) -> "LiveServer":
        self._thread.start()
        deadline = time.time() + timeout
        while not self._server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start in time")
            time.sleep(0.02)
        return self

    def stop(self) -> None:
        self._server.should_exit = True
        self._thread.join(timeout=10)
        self.services.close()


class SubprocessServer:
    """The CLI `serve` path in its own process: isolates benchmark timing from
    the test runner and makes SIGTERM drain the audit queue before exit."""

    def __init__(self, data_dir, rbac_mode: bool = True, admin_password: str = "adminpw",
                 pin_cpu: int | None = None):
        self.port = free_port()
        self.data_dir = data_dir
        self.readiness_probes = 0
        env = dict(os.environ)
        env["DICOMVAULT_ADMIN_PASSWORD"] = admin_password
        self._proc = subprocess.Popen(
            [sys.executable, "-m", "dicomvault.cli", "serve",
             "--host", "127.0.0.1", "--port", str(self.port),
             "--data-dir", str(data_dir)]
            + ([] if rbac_mode else ["--no-rbac"]),
            env=env, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        if pin_cpu is not None and hasattr(os, "sched_setaffinity"):
            try:
                os.sched_setaffinity(self._proc.pid, {pin_cpu})
            except OSError:
                pass  # pinning is best-effort measurement hygiene

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def start(self, timeout: float = 30.0) -> "SubprocessServer":
        deadline = time.time() + timeout
        with httpx.Client(base_url=self.url, timeout=2.0) as probe:
            while True:
                try:
                    if probe.get("/health").status_code == 200:
                        self.readiness_probes += 1
                        return self
                except httpx.HTTPError:
                    pass
                if time.time() > deadline or self._proc.poll() is not None:
                    raise RuntimeError("subprocess server did not come up")
                time.sleep(0.1)

    def stop(self, timeout: float = 15.0) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait(timeout=5)
