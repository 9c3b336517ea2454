"""HTTP client for the scorer wire protocol (/v1/score, /v1/fill, /v1/embed, /v1/info)."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
import requests

from .graph import Tokens
from .lm import BackendError, Fill, ScorerBackend, TransportError
from .verbalize import MaskedTemplate


class RemoteScorer(ScorerBackend):
    """Speaks the JSON-over-HTTP scorer protocol against a running service."""

    def __init__(self, base_url: str, timeout: float = 30.0, session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self._info: Optional[dict] = None

    def _request(self, method: str, path: str, payload: Optional[dict] = None) -> dict:
        url = f"{self.base_url}{path}"
        try:
            if method == "GET":
                resp = self.session.get(url, timeout=self.timeout)
            else:
                resp = self.session.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"scorer service unreachable at {url}: {exc}") from exc
        if resp.status_code == 503:
            raise BackendError(f"scorer service not ready: {_error_of(resp)}")
        if resp.status_code != 200:
            raise BackendError(f"scorer service returned {resp.status_code}: {_error_of(resp)}")
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendError(f"scorer service returned non-JSON body from {path}") from exc

    def info(self) -> dict:
        if self._info is None:
            self._info = self._request("GET", "/v1/info")
        return self._info

    @property
    def embedding_dim(self) -> int:
        return int(self.info()["embedding_dim"])

    @property
    def capabilities(self) -> frozenset[str]:
        return frozenset(self.info()["capabilities"])

    def score(self, tokens: Sequence[str]) -> float:
        if not tokens:
            raise ValueError("cannot score an empty sequence")
        out = self._request("POST", "/v1/score", {"tokens": list(tokens)})
        return float(out["log_prob"])

    def fill(self, template: MaskedTemplate, mask_position: int,
             candidates: Optional[Sequence[Tokens]], k: int) -> list[Fill]:
        payload = {
            "template": template.to_json(),
            "mask_position": mask_position,
            "candidates": [list(c) for c in candidates] if candidates is not None else None,
            "k": k,
        }
        out = self._request("POST", "/v1/fill", payload)
        return [Fill(tuple(f["tokens"]), float(f["log_score"])) for f in out["fills"]]

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            raise ValueError("cannot embed an empty sequence")
        out = self._request("POST", "/v1/embed", {"tokens": list(tokens)})
        return np.asarray(out["vector"], dtype=float)


def _error_of(resp: requests.Response) -> str:
    try:
        return str(resp.json().get("error", resp.text))
    except ValueError:
        return resp.text[:200]
