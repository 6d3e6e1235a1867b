"""Generic REST client for an external multi-engine scanner.

Protocol (URL templates are configurable, ``{id}`` is the submission id):

* ``POST <submit_url>`` with the raw file bytes -> ``{"id": ...}``, or a
  finished result directly;
* ``GET <poll_url>`` -> ``{"status": "queued" | "running" | "completed",
  "engines": {"<engine>": true | false, ...}}``.

Finished results are cached on disk under the sha256 of the file content, so a
re-scan of an unchanged file never touches the network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import pathlib
import time
from dataclasses import dataclass, field

import requests

log = logging.getLogger(__name__)

TERMINAL = {"completed", "done", "finished"}


@dataclass
class ScanResult:
    engines: dict = field(default_factory=dict)     # engine -> detected
    error: str | None = None                         # e.g. "scan-error(auth)"
    cached: bool = False

    @property
    def detections(self) -> int:
        return sum(bool(v) for v in self.engines.values())


@dataclass
class ScannerConfig:
    submit_url: str
    poll_url: str | None = None          # defaults to "<submit_url>/{id}"
    api_key_env: str = "JWBINDER_SCANNER_KEY"
    cache_dir: str = ".scan-cache"
    poll_interval: float = 2.0
    max_polls: int = 30
    timeout: float = 30.0


class ExternalScanner:
    def __init__(self, config: ScannerConfig, allow_network: bool = False, session=None):
        self.config = config
        self.allow_network = allow_network
        self.session = session or requests.Session()
        self.network_calls = 0

    def _cache_path(self, digest: str) -> pathlib.Path:
        return pathlib.Path(self.config.cache_dir) / f"{digest}.json"

    def _headers(self) -> dict:
        key = os.environ.get(self.config.api_key_env)
        return {"Authorization": f"Bearer {key}"} if key else {}

    def _request(self, method: str, url: str, **kwargs):
        self.network_calls += 1
        resp = self.session.request(method, url, headers=self._headers(), timeout=self.config.timeout, **kwargs)
        if resp.status_code in (401, 403):
            raise _ScanError("auth")
        if resp.status_code == 429:
            raise _ScanError("rate-limited")
        if resp.status_code >= 400:
            raise _ScanError(f"http-{resp.status_code}")
        try:
            return resp.json()
        except ValueError:
            raise _ScanError("bad-response") from None

    def scan_bytes(self, data: bytes, name: str = "sample.js") -> ScanResult:
        digest = hashlib.sha256(data).hexdigest()
        cache = self._cache_path(digest)
        if cache.exists():
            return ScanResult(json.loads(cache.read_text())["engines"], cached=True)
        if not self.allow_network:
            return ScanResult(error="scan-error(network-disabled)")
        try:
            engines = self._scan(data, name)
        except _ScanError as exc:
            return ScanResult(error=f"scan-error({exc.kind})")
        except requests.RequestException as exc:
            log.warning("scanner request failed for %s: %s", name, exc)
            return ScanResult(error="scan-error(network)")
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_text(json.dumps({"sha256": digest, "engines": engines}, sort_keys=True))
        return ScanResult(engines)

    def scan_file(self, path) -> ScanResult:
        path = pathlib.Path(path)
        return self.scan_bytes(path.read_bytes(), path.name)

    def _scan(self, data: bytes, name: str) -> dict:
        body = self._request("POST", self.config.submit_url, data=data,
                             params={"name": name})
        if _finished(body):
            return _engines(body)
        sub_id = body.get("id")
        if sub_id is None:
            raise _ScanError("bad-response")
        template = self.config.poll_url or self.config.submit_url.rstrip("/") + "/{id}"
        url = template.format(id=sub_id)
        for _ in range(self.config.max_polls):
            time.sleep(self.config.poll_interval)
            body = self._request("GET", url)
            if _finished(body):
                return _engines(body)
        raise _ScanError("poll-timeout")


class _ScanError(Exception):
    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(kind)


def _finished(body) -> bool:
    return isinstance(body, dict) and body.get("status") in TERMINAL and isinstance(body.get("engines"), dict)


def _engines(body: dict) -> dict:
    return {str(k): bool(v) for k, v in sorted(body["engines"].items())}
