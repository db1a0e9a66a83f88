"""Chat/vision completion gateway with a fixture-replay backend.

In fixture mode every response is looked up by (agent role, attempt index,
request digest); a miss is an error and never falls through to the network.
"""

import base64
import hashlib
import json
import logging
import os
import re
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import jsonschema

from .errors import ConfigError, FixtureError, SchemaError, TransportError
from .schemas import REGISTRY

log = logging.getLogger(__name__)

API_KEY_ENV = "POSTERGEN_API_KEY"
DEFAULT_MODEL = "gpt-4.1-2025-04-14"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
INDEX_NAME = "index.tsv"

_FENCE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class Message:
    role: str  # system | user | assistant
    text: str
    image: Optional[bytes] = None


@dataclass(frozen=True)
class ChatRequest:
    agent_role: str
    messages: tuple
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.7
    expects: str = "free-text"

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")

    def digest(self) -> str:
        """stable over role and message content; model and temperature excluded"""
        h = hashlib.sha256()
        h.update(self.agent_role.encode())
        for m in self.messages:
            h.update(b"\x00" + m.role.encode() + b"\x00" + m.text.encode("utf-8"))
            if m.image is not None:
                h.update(b"\x00img:" + hashlib.sha256(m.image).hexdigest().encode())
        return h.hexdigest()

    def extended(self, *extra: Message) -> "ChatRequest":
        return replace(self, messages=self.messages + tuple(extra))


@dataclass
class GatewayConfig:
    mode: str = "fixture"  # live | fixture
    fixture_path: Optional[str] = None
    endpoint_url: str = DEFAULT_ENDPOINT
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.7
    retry_budget: int = 2
    timeout_s: float = 120.0
    credential_env: str = API_KEY_ENV

    def validate(self, env=None):
        env = os.environ if env is None else env
        if self.mode not in ("live", "fixture"):
            raise ConfigError(f"gateway mode must be live or fixture, got {self.mode!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError(f"temperature {self.temperature} outside [0, 2]")
        if self.retry_budget < 0:
            raise ConfigError("retry_budget must be >= 0")
        if self.mode == "fixture" and not self.fixture_path:
            raise ConfigError("fixture mode requires a fixture store path")
        if self.mode == "live" and not env.get(self.credential_env):
            raise ConfigError(f"live mode requires the {self.credential_env} environment variable")


class FixtureStore:
    """directory of response files indexed by a tab-separated index file"""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._entries = None

    def _load(self):
        if self._entries is not None:
            return self._entries
        entries = {}
        index = self.path / INDEX_NAME
        if index.exists():
            for lineno, line in enumerate(index.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise FixtureError(f"{index}:{lineno}: expected 4 tab-separated fields")
                role, attempt, digest, fname = parts
                entries[(role, int(attempt), digest)] = fname
        self._entries = entries
        return entries

    def __len__(self):
        return len(self._load())

    def get(self, role: str, attempt: int, digest: str) -> str:
        with self._lock:
            fname = self._load().get((role, attempt, digest))
        if fname is None:
            raise FixtureError(
                f"no fixture for role={role} attempt={attempt} digest={digest}", digest=digest
            )
        return (self.path / fname).read_text(encoding="utf-8")

    def put(self, role: str, attempt: int, digest: str, text: str):
        with self._lock:
            entries = self._load()
            fname = f"responses/{role}-{attempt}-{digest[:16]}.txt"
            target = self.path / fname
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
            entries[(role, attempt, digest)] = fname
            lines = [f"{r}\t{a}\t{d}\t{f}" for (r, a, d), f in sorted(entries.items())]
            (self.path / INDEX_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")


class LiveBackend:
    def __init__(self, cfg: GatewayConfig, env=None):
        env = os.environ if env is None else env
        self.cfg = cfg
        self._key = env.get(cfg.credential_env)

    def __call__(self, req: ChatRequest, attempt: int) -> str:
        messages = []
        for m in req.messages:
            if m.image is None:
                messages.append({"role": m.role, "content": m.text})
                continue
            url = "data:image/png;base64," + base64.b64encode(m.image).decode("ascii")
            messages.append({"role": m.role, "content": [
                {"type": "text", "text": m.text},
                {"type": "image_url", "image_url": {"url": url}},
            ]})
        body = json.dumps({"model": req.model_id, "temperature": req.temperature,
                           "messages": messages}).encode("utf-8")
        http_req = urllib.request.Request(
            self.cfg.endpoint_url, data=body, method="POST",
            headers={"Content-Type": "application/json", "Authorization": f"Bearer {self._key}"},
        )
        try:
            with urllib.request.urlopen(http_req, timeout=self.cfg.timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as e:
            raise TransportError(f"{req.agent_role}: HTTP {e.code} from provider", status=e.code) from e
        except (urllib.error.URLError, OSError) as e:
            raise TransportError(f"{req.agent_role}: transport failure: {e}") from e
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as e:
            raise TransportError(f"{req.agent_role}: unexpected response shape") from e


class FixtureBackend:
    def __init__(self, store: FixtureStore):
        self.store = store

    def __call__(self, req: ChatRequest, attempt: int) -> str:
        return self.store.get(req.agent_role, attempt, req.digest())


class RecordingBackend:
    """answers through `responder` and stores every answer as a fixture"""

    def __init__(self, responder: Callable, store: FixtureStore):
        self.responder = responder
        self.store = store

    def __call__(self, req: ChatRequest, attempt: int) -> str:
        text = self.responder(req, attempt)
        self.store.put(req.agent_role, attempt, req.digest(), text)
        return text


def strip_fences(text: str) -> str:
    m = _FENCE.search(text)
    return m.group(1).strip() if m else text.strip()


def parse_json_text(text: str):
    body = strip_fences(text)
    try:
        return json.loads(body)
    except json.JSONDecodeError:
        starts = [i for i in (body.find("{"), body.find("[")) if i >= 0]
        if not starts:
            raise
        value, _ = json.JSONDecoder().raw_decode(body[min(starts):])
        return value


def validate_schema(value, schema_id: str):
    if schema_id not in REGISTRY:
        raise KeyError(f"unknown schema id {schema_id!r}")
    jsonschema.validate(value, REGISTRY[schema_id])


class Gateway:
    def __init__(self, cfg: GatewayConfig, backend: Callable = None, env=None):
        self.cfg = cfg
        if backend is None:
            cfg.validate(env)
            if cfg.mode == "fixture":
                backend = FixtureBackend(FixtureStore(cfg.fixture_path))
            else:
                backend = LiveBackend(cfg, env)
        self.backend = backend
        self.calls = []

    def request(self, agent_role: str, messages, expects="free-text") -> ChatRequest:
        return ChatRequest(agent_role, tuple(messages), self.cfg.model_id,
                           self.cfg.temperature, expects)

    def complete(self, req: ChatRequest, attempt: int = 0) -> str:
        self.calls.append((req.agent_role, attempt))
        return self.backend(req, attempt)

    def complete_json(self, req: ChatRequest, schema_id: str, check: Callable = None,
                      retry_budget: int = None, error_cls=SchemaError):
        """parse and validate a JSON reply, re-prompting with the error on failure

        `check` may return a list of semantic violations; those re-prompt too and,
        once the budget is spent, raise `error_cls` carrying the violations.
        """
        if schema_id not in REGISTRY:
            raise KeyError(f"unknown schema id {schema_id!r}")
        budget = self.cfg.retry_budget if retry_budget is None else retry_budget
        last_error, violations = None, []
        for attempt in range(budget + 1):
            text = self.complete(req, attempt)
            try:
                value = parse_json_text(text)
                validate_schema(value, schema_id)
            except json.JSONDecodeError as e:
                last_error, violations = f"response is not valid JSON ({e.msg})", []
            except jsonschema.ValidationError as e:
                path = "/".join(str(p) for p in e.absolute_path) or "<root>"
                last_error, violations = f"schema violation at {path}: {e.message}", []
            else:
                violations = list(check(value)) if check else []
                if not violations:
                    return value
                last_error = "; ".join(violations)
            log.info("%s attempt %d rejected: %s", req.agent_role, attempt, last_error)
            req = req.extended(
                Message("assistant", text),
                Message("user", f"The previous response was rejected: {last_error}. "
                                "Return the corrected JSON only."),
            )
        msg = f"{req.agent_role}: invalid response after {budget + 1} attempts: {last_error}"
        if violations and error_cls is not SchemaError:
            raise error_cls(msg, violations)
        raise SchemaError(msg)


def complete(req: ChatRequest, cfg: GatewayConfig) -> str:
    return Gateway(cfg).complete(req)


def complete_json(req: ChatRequest, schema_id: str, cfg: GatewayConfig):
    return Gateway(cfg).complete_json(req, schema_id)
