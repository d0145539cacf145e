"""Natural-language plans to models, through a text-completion provider.

The provider boundary is one operation: prompt in, response text out.  The
`replay` provider reads canned responses from a transcript directory (one
file per problem id), which makes the whole pipeline runnable and
deterministic without credentials.  The `http_chat` provider posts to a
chat-completions style endpoint; the API key is read from the environment
variable named in the config at request time and is never stored, logged or
echoed into results.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from . import smv
from . import syntax as sx


class ProviderError(Exception):
    """Transport, auth or transcript failure; distinct from a parse failure."""


class ExtractError(Exception):
    """No usable model block in the response."""


class ConfigError(Exception):
    pass


@dataclass
class ProviderConfig:
    kind: str
    endpoint: Optional[str] = None
    model: Optional[str] = None
    api_key_env: Optional[str] = None
    temperature: Optional[float] = None
    reasoning_effort: Optional[str] = None
    timeout: float = 30.0
    max_retries: int = 3  # total attempts, not extra tries
    max_in_flight: int = 4
    transcript_dir: Optional[str] = None


_CONFIG_FIELDS = {
    "kind": str,
    "endpoint": str,
    "model": str,
    "api_key_env": str,
    "temperature": (int, float),
    "reasoning_effort": str,
    "timeout": (int, float),
    "max_retries": int,
    "max_in_flight": int,
    "transcript_dir": str,
}


def load_provider_config(text: str, base_dir: Optional[str] = None) -> ProviderConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"provider config is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("provider config must be a JSON object")
    for key, value in doc.items():
        want = _CONFIG_FIELDS.get(key)
        if want is None:
            raise ConfigError(f"unknown provider config field {key!r}")
        if not isinstance(value, want) or isinstance(value, bool):
            raise ConfigError(f"provider config field {key!r} has the wrong type")
    kind = doc.get("kind")
    if kind not in ("http_chat", "replay"):
        raise ConfigError("provider config needs \"kind\": \"http_chat\" or \"replay\"")
    cfg = ProviderConfig(kind=kind)
    for key in doc:
        if key != "kind":
            setattr(cfg, key, doc[key])
    if cfg.timeout <= 0:
        raise ConfigError("timeout must be positive")
    if cfg.max_retries < 1:
        raise ConfigError("max_retries must be at least 1")
    if cfg.max_in_flight < 1:
        raise ConfigError("max_in_flight must be at least 1")
    if kind == "replay":
        if not cfg.transcript_dir:
            raise ConfigError("replay provider requires transcript_dir")
        if base_dir is not None and not os.path.isabs(cfg.transcript_dir):
            cfg.transcript_dir = os.path.join(base_dir, cfg.transcript_dir)
    else:
        if not cfg.endpoint or not cfg.api_key_env:
            raise ConfigError("http_chat provider requires endpoint and api_key_env")
    return cfg


# ---------------------------------------------------------------------------
# Providers
# ---------------------------------------------------------------------------


class ReplayProvider:
    def __init__(self, transcript_dir: str):
        self.transcript_dir = transcript_dir

    def complete(self, prompt: str, case_id: Optional[str]) -> str:
        if case_id is None:
            raise ProviderError("replay provider needs a case id to pick a transcript")
        path = os.path.join(self.transcript_dir, f"{case_id}.txt")
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except OSError:
            raise ProviderError(f"no transcript for {case_id!r}") from None


class HttpChatProvider:
    def __init__(self, cfg: ProviderConfig):
        self.cfg = cfg

    def complete(self, prompt: str, case_id: Optional[str]) -> str:
        import requests

        cfg = self.cfg
        key = os.environ.get(cfg.api_key_env or "")
        if not key:
            raise ProviderError(f"API key environment variable {cfg.api_key_env} is not set")
        body: dict = {"messages": [{"role": "user", "content": prompt}]}
        if cfg.model is not None:
            body["model"] = cfg.model
        if cfg.temperature is not None:
            body["temperature"] = cfg.temperature
        if cfg.reasoning_effort is not None:
            body["reasoning_effort"] = cfg.reasoning_effort
        try:
            resp = requests.post(
                cfg.endpoint,
                json=body,
                headers={"Authorization": f"Bearer {key}"},
                timeout=cfg.timeout,
            )
        except requests.RequestException as e:
            raise ProviderError(f"request failed: {e.__class__.__name__}") from None
        if resp.status_code != 200:
            raise ProviderError(f"HTTP {resp.status_code} from provider")
        try:
            data = resp.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            raise ProviderError("malformed provider response") from None
        if not isinstance(content, str):
            raise ProviderError("malformed provider response")
        return content


def make_provider(cfg: ProviderConfig):
    if cfg.kind == "replay":
        return ReplayProvider(cfg.transcript_dir)
    return HttpChatProvider(cfg)


def complete_with_retries(provider, prompt: str, case_id: Optional[str], max_retries: int) -> str:
    attempts = max(1, max_retries)
    last: Optional[ProviderError] = None
    for _ in range(attempts):
        try:
            return provider.complete(prompt, case_id)
        except ProviderError as e:
            last = e
    raise ProviderError(f"provider failed after {attempts} attempt(s): {last}")


# ---------------------------------------------------------------------------
# Prompts
# ---------------------------------------------------------------------------


_TRANSLATE_RULES = """\
You translate step-by-step plan descriptions into a finite-state model and a
temporal goal, in the SMV subset shown in the example.

Rules:
- Answer with exactly one fenced code block and nothing else.
- The block must contain a complete MODULE main: one boolean VAR per fact,
  a `stage` enum that sequences the actions, and a boolean `ok` that latches
  FALSE when an action's preconditions do not hold at its stage.
- ASSIGN every variable an init() and a next(); use case ... esac with a
  final TRUE branch.
- End the block with one LTLSPEC line of the form
  F (stage = done & ok & <goal literals>).
"""


def default_exemplar() -> tuple[str, str]:
    """The in-repo one-shot example: a 3-action plan and its encoding."""
    data = resources.files("plancheck").joinpath("data")
    plan = data.joinpath("exemplar_plan.txt").read_text(encoding="utf-8")
    model = data.joinpath("exemplar_model.smv").read_text(encoding="utf-8")
    return plan, model


def build_prompt(nl_plan: str, exemplar: tuple[str, str]) -> str:
    ex_plan, ex_model = exemplar
    return (
        _TRANSLATE_RULES
        + "\nExample plan:\n"
        + ex_plan.rstrip("\n")
        + "\n\nExample translation:\n```\n"
        + ex_model.rstrip("\n")
        + "\n```\n\nPlan:\n"
        + nl_plan.rstrip("\n")
        + "\n\nTranslation:\n"
    )


def build_judge_prompt(nl_plan: str) -> str:
    return (
        "You judge whether a step-by-step plan reaches its stated goal when "
        "every action's preconditions must hold at the moment it runs.\n"
        "Answer with the single word VALID or INVALID.\n\nPlan:\n"
        + nl_plan.rstrip("\n")
        + "\n\nAnswer:\n"
    )


_JUDGE_RE = re.compile(r"\b(INVALID|VALID)\b")


def parse_judgement(response: str) -> Optional[str]:
    """First constrained answer token in the response, or None."""
    m = _JUDGE_RE.search(response)
    if m is None:
        return None
    return "Invalid" if m.group(1) == "INVALID" else "Valid"


# ---------------------------------------------------------------------------
# Extraction and the full pipeline
# ---------------------------------------------------------------------------


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def extract_artifacts(response: str) -> tuple[str, str]:
    """Pull (model text, spec text) out of a fenced response.

    The first fenced block containing "MODULE main" is the model; LTLSPEC
    lines inside it from the first one onward become the spec text, or the
    first later block containing "LTLSPEC" does.
    """
    blocks = _FENCE_RE.findall(response)
    model_block = None
    rest: list[str] = []
    for b in blocks:
        if model_block is None and "MODULE main" in b:
            model_block = b
        elif model_block is not None:
            rest.append(b)
    if model_block is None:
        raise ExtractError("no model block")
    if not model_block.endswith("\n"):
        model_block += "\n"
    lines = model_block.splitlines()
    split = next((i for i, ln in enumerate(lines) if ln.lstrip().startswith("LTLSPEC")), None)
    if split is not None:
        return "\n".join(lines[:split]) + "\n", "\n".join(lines[split:]) + "\n"
    for b in rest:
        if "LTLSPEC" in b:
            spec_lines = [ln for ln in b.splitlines() if ln.lstrip().startswith("LTLSPEC")]
            return model_block, "\n".join(spec_lines) + "\n"
    return model_block, ""


@dataclass
class TranslationResult:
    raw_response: str
    model_text: str
    spec_text: str
    parsed: Optional[tuple[sx.SmvModel, object]]
    failure: Optional[Exception]
    latency: float


def translate(
    nl_plan: str,
    cfg: ProviderConfig,
    *,
    case_id: Optional[str] = None,
    provider=None,
    exemplar: Optional[tuple[str, str]] = None,
) -> TranslationResult:
    """Prompt, complete, extract and parse.

    Extraction and parse failures land in ``failure`` (downstream verdict
    UnknownParse); provider failures raise ProviderError after retries.
    """
    prompt = build_prompt(nl_plan, exemplar if exemplar is not None else default_exemplar())
    if provider is None:
        provider = make_provider(cfg)
    t0 = time.perf_counter()
    response = complete_with_retries(provider, prompt, case_id, cfg.max_retries)
    latency = 0.0 if cfg.kind == "replay" else time.perf_counter() - t0

    try:
        model_text, spec_text = extract_artifacts(response)
    except ExtractError as e:
        return TranslationResult(response, "", "", None, e, latency)
    try:
        model = smv.parse_model(model_text + spec_text)
    except smv.ParseError as e:
        return TranslationResult(response, model_text, spec_text, None, e, latency)
    if not model.ltlspecs:
        failure = smv.ParseError("no LTLSPEC in translated output", 1, 1)
        return TranslationResult(response, model_text, spec_text, None, failure, latency)
    return TranslationResult(response, model_text, spec_text, (model, model.ltlspecs[0]), None, latency)
