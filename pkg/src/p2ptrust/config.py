"""Simulation configuration: defaults, ``key=value`` files and overrides.

Precedence is command-line override > file > built-in default.  The built-in
defaults are the full-scale settings (6000 peers, 100 generations);
``configs/desk.cfg`` holds the smaller desk-scale setup.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ConfigError

PRIVACY_MODES = ("off", "proxy", "handle", "full")


@dataclass(frozen=True)
class SimConfig:
    peers: int = 6000
    ba_m: int = 3
    categories: int = 32
    zipf_alpha: float = 0.8
    files_per_peer: int = 20
    files_per_category: int = 100
    edge_limit: float = 2.0
    degree_of_rewiring: float = 0.3
    degree_of_deception: float = 0.1
    malicious_fraction: float = 0.1
    threat_model: str = "A"
    churn_fraction: float = 0.1
    bfs_ttl: int = 5
    dfs_ttl: int = 10
    max_fanout: int = 10
    searches_per_generation: int = 5000
    exact_query_count: bool = False
    generations: int = 100
    trust_cache_size: int = 32
    recency_rho: float = 1.0
    privacy: str = "off"
    prefix_bits: int = 16
    bloom_m: int = 1024
    bloom_k: int = 7
    crypto: str = "hash"
    cc_sample: int = 200
    unreachable_path_len: int = 15
    seed: int = 1
    trace_queries: bool = False
    graph_dump_interval: int = 0
    write_census: bool = False
    write_trust: bool = False
    write_adaptation: bool = False

    def __post_init__(self) -> None:
        validate(self)

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def to_lines(self) -> list[str]:
        return [f"{f.name}={_render(getattr(self, f.name))}" for f in fields(self)]


def _render(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


_FIELDS = {f.name: f for f in fields(SimConfig)}


def _coerce(key: str, raw: object):
    if key not in _FIELDS:
        raise ConfigError(key, "unknown configuration key")
    kind = _FIELDS[key].type
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "bool":
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r} as {kind}") from None
    return text


def _require(ok: bool, key: str, message: str) -> None:
    if not ok:
        raise ConfigError(key, message)


def validate(cfg: SimConfig) -> None:
    _require(cfg.edge_limit > 1.0, "edge_limit",
             f"must be > 1 (RIC = degree / initial_degree is at least 1), got {cfg.edge_limit}")
    _require(cfg.ba_m >= 1, "ba_m", "must be >= 1")
    _require(cfg.peers >= cfg.ba_m + 1, "peers", "must be >= ba_m + 1")
    _require(cfg.categories >= 6, "categories", "must be >= 6 so peers can pick 3-6 categories")
    _require(cfg.zipf_alpha > 0, "zipf_alpha", "must be > 0")
    _require(cfg.files_per_peer >= 6, "files_per_peer", "must be >= 6 (one file per chosen category)")
    _require(cfg.files_per_category >= cfg.files_per_peer, "files_per_category", "must be >= files_per_peer")
    for key in ("degree_of_rewiring", "degree_of_deception", "malicious_fraction"):
        value = getattr(cfg, key)
        _require(0.0 <= value <= 1.0, key, f"must be in [0, 1], got {value}")
    _require(0.0 <= cfg.churn_fraction < 1.0, "churn_fraction", "must be in [0, 1)")
    _require(cfg.threat_model in ("A", "B"), "threat_model", "must be A or B")
    for key in ("bfs_ttl", "dfs_ttl", "max_fanout", "generations", "trust_cache_size", "cc_sample",
                "unreachable_path_len"):
        _require(getattr(cfg, key) >= 1, key, "must be >= 1")
    _require(cfg.searches_per_generation >= 0, "searches_per_generation", "must be >= 0")
    _require(0.0 < cfg.recency_rho <= 1.0, "recency_rho", "must be in (0, 1]")
    _require(cfg.privacy in PRIVACY_MODES, "privacy", f"must be one of {', '.join(PRIVACY_MODES)}")
    _require(0 < cfg.prefix_bits < 256, "prefix_bits", "must be in (0, 256)")
    _require(cfg.bloom_m >= 8 and cfg.bloom_k >= 1, "bloom_m", "bloom_m must be >= 8 and bloom_k >= 1")
    _require(cfg.crypto in ("hash", "rsa"), "crypto", "must be hash or rsa")
    _require(cfg.graph_dump_interval >= 0, "graph_dump_interval", "must be >= 0")


def parse_lines(lines: Iterable[str]) -> dict[str, object]:
    values: dict[str, object] = {}
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"line {number}: expected key=value")
        key, raw = (part.strip() for part in line.split("=", 1))
        values[key] = _coerce(key, raw)
    return values


def build_config(
    path: str | Path | None = None, overrides: Mapping[str, object] | None = None
) -> SimConfig:
    values: dict[str, object] = {}
    if path is not None:
        values.update(parse_lines(Path(path).read_text().splitlines()))
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, raw)
    try:
        return SimConfig(**values)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
