"""Layered configuration handed to the harness registry.

Layers merge in order: :data:`DEFAULT_CONFIG`, an optional JSON file, then
overrides from the command line. Sections are plain nested dicts, read by the
harness services through ``inject.nested_config``.
"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, MutableMapping, Optional, Union

from .errors import ConfigError
from .oracle import DEFAULT_MAX_CANDIDATES, DEFAULT_MAX_POINTS

LOG = logging.getLogger(__name__)

DEFAULT_CONFIG: Mapping[str, Mapping[str, Any]] = {
    "oracle": {
        "max_points": DEFAULT_MAX_POINTS,
        "max_candidates": DEFAULT_MAX_CANDIDATES,
    },
    "clustering_game": {
        "epsilon": "1/4",
        # None means rho = d
        "rho": None,
        "mode": "det",
    },
    "duel": {
        "workers": 1,
        "master_seed": 0,
    },
    "simulate": {
        "audit": True,
    },
}


def deep_merge(base: MutableMapping[str, Any], layer: Mapping[str, Any]) -> MutableMapping[str, Any]:
    """Merge ``layer`` into ``base`` in place, recursing into nested dicts."""
    for key, value in layer.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), MutableMapping):
            deep_merge(base[key], value)
        else:
            base[key] = copy.deepcopy(value)
    return base


def _read(path: Union[str, Path]) -> Mapping[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} line {e.lineno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object, got {type(data).__name__}")
    for section, value in data.items():
        if section in DEFAULT_CONFIG and not isinstance(value, dict):
            raise ConfigError(f"config {path}: section {section!r} must be an object")
    return data


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Dict[str, Any]:
    """The merged configuration.

    Raises:
        ConfigError: the file is missing, is not JSON, or a known section is
            not an object.
    """
    config: Dict[str, Any] = copy.deepcopy(dict(DEFAULT_CONFIG))
    if path is not None:
        LOG.info("loading config from %s", path)
        deep_merge(config, _read(path))
    if overrides:
        deep_merge(config, overrides)
    return config
