"""Run configuration: flat key=value files, flag overrides and artifact hashes.

Every experiment variant (POS filtering, sentence weighting, section
pruning) is a configuration, not a code path. Artifacts embed the hash of
the settings that shaped them so mismatched index/config pairs are caught.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, fields, replace

from .combine import CombineParams
from .textpipe import stopword_list_id

PIPELINE_MODES = ("stemmed", "pos-noun", "pos-all")

_PATH_KEYS = ("dump", "wordnet_dir", "ngrams_uni", "ngrams_bi", "testset",
              "index", "pos_annotations", "ic_table")
# settings that change the content of a built index
_INDEX_KEYS = ("mode", "min_terms", "min_links", "sentence_weight",
               "prune_sections", "prune_threshold")


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: str = "stemmed"
    min_terms: int = 200
    min_links: int = 14
    sentence_weight: int = 1
    prune_sections: bool = False
    prune_threshold: float = 0.8
    ngram_min_year: int = 1970
    seed: int = 42
    dedupe: bool = False
    combine: CombineParams = field(default_factory=CombineParams)
    dump: str = ""
    wordnet_dir: str = ""
    ngrams_uni: str = ""
    ngrams_bi: str = ""
    testset: str = ""
    index: str = ""
    pos_annotations: str = ""
    ic_table: str = ""

    def __post_init__(self):
        if self.mode not in PIPELINE_MODES:
            raise ConfigError(f"unknown pipeline mode {self.mode!r}")
        if self.sentence_weight < 1:
            raise ConfigError("sentence_weight must be a positive integer")


_COMBINE_KEYS = {
    "lambda": "lambda_",
    "m": "m",
    "s": "s",
    "lambda_prime": "lambda_prime",
    "m_prime": "m_prime",
    "s_prime": "s_prime",
    "xi": "xi",
}

_SCALAR_KEYS = ("mode", "min_terms", "min_links", "sentence_weight",
                "prune_sections", "prune_threshold", "ngram_min_year",
                "seed", "dedupe")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_config(cfg: RunConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key in _SCALAR_KEYS:
            fh.write(f"{key}={_format_value(getattr(cfg, key))}\n")
        for key, attr in _COMBINE_KEYS.items():
            fh.write(f"{key}={getattr(cfg.combine, attr)!r}\n")
        for key in _PATH_KEYS:
            fh.write(f"{key}={getattr(cfg, key)}\n")


def _parse_scalar(key: str, raw: str):
    if key == "mode":
        return raw
    if key in ("prune_sections", "dedupe"):
        if raw not in ("true", "false"):
            raise ConfigError(f"{key} must be true or false, got {raw!r}")
        return raw == "true"
    if key == "prune_threshold":
        return float(raw)
    return int(raw)


def load_config(path: str, check_paths: bool = True) -> RunConfig:
    """Parse a key=value file; unknown keys and missing referenced paths fail."""
    scalars = {}
    combine = {}
    paths = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if not eq:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            if key in _COMBINE_KEYS:
                combine[_COMBINE_KEYS[key]] = float(raw)
            elif key in _SCALAR_KEYS:
                scalars[key] = _parse_scalar(key, raw)
            elif key in _PATH_KEYS:
                paths[key] = raw
            else:
                raise ConfigError(f"{path}:{lineno}: unknown configuration key {key!r}")
    cfg = RunConfig(combine=CombineParams(**combine), **scalars, **paths)
    if check_paths:
        check_config_paths(cfg)
    return cfg


def check_config_paths(cfg: RunConfig) -> None:
    for key in _PATH_KEYS:
        value = getattr(cfg, key)
        if value and key != "index" and not os.path.exists(value):
            raise ConfigError(f"configured {key} does not exist: {value}")


def index_config_hash(cfg: RunConfig) -> str:
    """Hash of the settings that determine index content, including the
    identity of the bundled stop-word list and tokenizer rule."""
    parts = [f"{k}={_format_value(getattr(cfg, k))}" for k in _INDEX_KEYS]
    parts.append(f"stopwords={stopword_list_id()}")
    parts.append("tokenizer=lowercase-letter-runs")
    blob = "\n".join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def full_config_hash(cfg: RunConfig) -> str:
    """Hash of all semantic settings (paths excluded)."""
    parts = [f"{k}={_format_value(getattr(cfg, k))}" for k in _SCALAR_KEYS]
    parts += [f"{k}={getattr(cfg.combine, a)!r}" for k, a in _COMBINE_KEYS.items()]
    parts.append(f"stopwords={stopword_list_id()}")
    blob = "\n".join(parts).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


def apply_overrides(cfg: RunConfig, **overrides) -> RunConfig:
    """Replace any non-None override, mapping combine keys onto the nested params."""
    combine_updates = {}
    direct = {}
    valid = {f.name for f in fields(RunConfig)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in _COMBINE_KEYS.values():
            combine_updates[key] = value
        elif key in valid:
            direct[key] = value
        else:
            raise ConfigError(f"unknown configuration override {key!r}")
    if combine_updates:
        direct["combine"] = replace(cfg.combine, **combine_updates)
    return replace(cfg, **direct) if direct else cfg
