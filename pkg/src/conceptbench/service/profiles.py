"""Per-phase profiles: named, hashable parameter bundles for one design-loop
step. A profile fully determines a phase run, so equal hashes mean equal
artifacts."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from ..errors import ConfigurationError

PHASES = (
    "start_investigation",
    "compose_artifact",
    "analyze_artifact",
    "deploy_knowledge",
)

ARTIFACT_KINDS = ("fca", "tca", "esom", "hmm")


@dataclass(frozen=True)
class Profile:
    name: str
    phase: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ConfigurationError(
                f"unknown phase {self.phase!r}; expected one of {PHASES}")
        validator = _VALIDATORS[self.phase]
        validator(self.name, self.parameters)

    @property
    def hash(self) -> str:
        canonical = json.dumps(
            {"name": self.name, "phase": self.phase,
             "parameters": self.parameters},
            sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        return {"name": self.name, "phase": self.phase,
                "parameters": self.parameters}

    @classmethod
    def from_dict(cls, payload: dict) -> "Profile":
        try:
            return cls(name=payload["name"], phase=payload["phase"],
                       parameters=payload.get("parameters", {}))
        except KeyError as exc:
            raise ConfigurationError(f"profile missing field: {exc}") from None


def _require(params: dict, name: str, key: str, kind=None):
    if key not in params:
        raise ConfigurationError(f"profile {name!r}: missing parameter "
                                 f"{key!r}")
    value = params[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigurationError(
            f"profile {name!r}: parameter {key!r} must be "
            f"{getattr(kind, '__name__', kind)}")
    return value


def _validate_start(name: str, params: dict) -> None:
    attrs = _require(params, name, "attributes", list)
    if not attrs:
        raise ConfigurationError(
            f"profile {name!r}: needs at least one attribute")
    seg = params.get("segmentation")
    if seg is not None:
        if not isinstance(seg, dict) or "rule" not in seg \
                or "segment" not in seg:
            raise ConfigurationError(
                f"profile {name!r}: segmentation needs rule and segment")
    if params.get("object_cluster") is not None \
            and not isinstance(params["object_cluster"], str):
        raise ConfigurationError(
            f"profile {name!r}: object_cluster must be a rule name")


def _validate_compose(name: str, params: dict) -> None:
    kind = _require(params, name, "kind", str)
    if kind not in ARTIFACT_KINDS:
        raise ConfigurationError(
            f"profile {name!r}: unknown artifact kind {kind!r}")
    _require(params, name, "context", str)
    if kind == "tca":
        _require(params, name, "entity_key", str)
        _require(params, name, "granularity", str)
    if kind == "esom":
        _require(params, name, "seed", int)
        _require(params, name, "epochs", int)
    if kind == "hmm":
        mode = params.get("mode", "process")
        if mode not in ("process", "em"):
            raise ConfigurationError(
                f"profile {name!r}: unknown hmm mode {mode!r}")
        _require(params, name, "entity_key", str)
        _require(params, name, "symbols", list)
        if mode == "em":
            _require(params, name, "n_states", int)
            _require(params, name, "seed", int)


def _validate_analyze(name: str, params: dict) -> None:
    top = params.get("top_terms", 20)
    if not isinstance(top, int) or top < 1:
        raise ConfigurationError(
            f"profile {name!r}: top_terms must be a positive integer")


def _validate_deploy(name: str, params: dict) -> None:
    artifacts = _require(params, name, "artifacts", list)
    if not artifacts:
        raise ConfigurationError(
            f"profile {name!r}: deploy needs at least one artifact")
    annotations = params.get("annotations", {})
    if not isinstance(annotations, dict):
        raise ConfigurationError(
            f"profile {name!r}: annotations must be a mapping")


_VALIDATORS = {
    "start_investigation": _validate_start,
    "compose_artifact": _validate_compose,
    "analyze_artifact": _validate_analyze,
    "deploy_knowledge": _validate_deploy,
}
