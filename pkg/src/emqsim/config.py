"""Config-file loading, flag merging and canonical serialization.

Experiments are configured by a YAML file of scalars and nested tables
(see :class:`~emqsim.experiments.ExperimentConfig` for the schema) plus
command-line flags; flags always win.  Every failure mode -- unreadable
file, syntax error, unknown key, out-of-range value -- surfaces as
:class:`~emqsim.errors.ConfigError` carrying the best line information
available: YAML syntax errors are exact, semantic errors point at the
line where the offending key appears.

``serialize_config`` emits a canonical form (sorted keys, explicit
defaults) such that parse -> serialize is idempotent.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Optional

import yaml
from pydantic import ValidationError

from .errors import ConfigError
from .experiments import ExperimentConfig


def load_config_file(path: str) -> dict:
    """Read a YAML config file into a plain mapping.

    Raises:
        ConfigError: if the file is unreadable, contains invalid YAML
            (with the reported line), or is not a mapping at top level.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else path
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: invalid config syntax: {problem}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a table of key/value pairs")
    return data


def merge_overrides(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict:
    """Deep-merge ``overrides`` into ``base``; override values win.

    Nested tables merge key-by-key; any other value replaces wholesale.
    """
    merged = dict(base)
    for key, value in overrides.items():
        if (
            key in merged
            and isinstance(merged[key], Mapping)
            and isinstance(value, Mapping)
        ):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def _find_key_line(text: str, key: str) -> Optional[int]:
    """Best-effort line number of ``key:`` in the config text."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if stripped.startswith(f"{key}:") or stripped.startswith(f"{key} :"):
            return lineno
    return None


def build_config(
    data: Mapping[str, Any],
    source_path: Optional[str] = None,
) -> ExperimentConfig:
    """Validate a merged mapping into an :class:`ExperimentConfig`.

    Raises:
        ConfigError: one line per problem, each as ``key.path: message``,
            with a ``path:line`` prefix when the key can be located in the
            source file.
    """
    try:
        return ExperimentConfig.model_validate(dict(data))
    except ValidationError as exc:
        text = ""
        if source_path is not None:
            try:
                with open(source_path) as fh:
                    text = fh.read()
            except OSError:
                text = ""
        problems = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "(root)"
            prefix = ""
            if text and err["loc"]:
                line = _find_key_line(text, str(err["loc"][-1]))
                if line is not None:
                    prefix = f"{source_path}:{line}: "
            problems.append(f"{prefix}{loc}: {err['msg']}")
        raise ConfigError("invalid config: " + "; ".join(problems)) from exc


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain-scalar mapping of a config, with infinities as the string 'inf'."""

    def convert(value):
        if isinstance(value, dict):
            return {k: convert(v) for k, v in value.items()}
        if isinstance(value, list):
            return [convert(v) for v in value]
        if isinstance(value, float) and math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value

    return convert(cfg.model_dump(mode="python"))


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical YAML rendering: sorted keys, all defaults explicit."""
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=True, default_flow_style=False)


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse YAML text directly (the service's request body path)."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{where}invalid config syntax") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a table of key/value pairs")
    return build_config(data)
