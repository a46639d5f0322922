"""Experiment configuration: one YAML (or JSON) document that can override
every default in the simulator."""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml

from memcolor.classifier import Category, SamplerConfig, Thresholds
from memcolor.hierarchy import (DEFAULT_LATENCIES, DEFAULT_LLC,
                                DEFAULT_PRIVATE, CacheConfig)
from memcolor.mapping import AddressMapping, validate_mapping
from memcolor.workloads import ArchetypeParams, canonical_params


class ConfigError(ValueError):
    pass


@dataclass
class WorkloadEntry:
    app: str
    core: int = 0
    trace_path: str | None = None
    params: ArchetypeParams | None = None


@dataclass
class ExperimentConfig:
    mapping: AddressMapping = field(default_factory=AddressMapping)
    private_cache: CacheConfig = DEFAULT_PRIVATE
    llc: CacheConfig = DEFAULT_LLC
    latencies: dict = field(default_factory=lambda: dict(DEFAULT_LATENCIES))
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    workload: list = field(default_factory=list)       # WorkloadEntry
    profile: list | None = None                        # [(app, Category)] bypasses classification
    policy: str = "auto"
    seed: int = 0
    total_pages: int | None = None
    core_count: int = 4
    multithreaded: bool = False
    mix_chunk: int = 1
    epoch: int | None = None
    allow_fallback: bool = False

    def resolved_total_pages(self) -> int:
        return self.total_pages or self.mapping.total_pages


def _mapping_from(doc: dict) -> AddressMapping:
    kwargs = {}
    for key in ("page_offset_bits", "line_offset_bits", "row_shift", "mem_bytes"):
        if key in doc:
            kwargs[key] = int(doc[key])
    for key in ("set_index_bits", "bank_index_bits"):
        if key in doc:
            kwargs[key] = tuple(int(b) for b in doc[key])
    for key in ("b_bits", "c_bits", "o_bits"):
        if key in doc:
            kwargs[key] = frozenset(int(b) for b in doc[key])
    return AddressMapping(**kwargs)


def _cache_from(doc: dict, default: CacheConfig) -> CacheConfig:
    return CacheConfig(size_bytes=int(doc.get("size", default.size_bytes)),
                       ways=int(doc.get("ways", default.ways)),
                       line_bytes=int(doc.get("line", default.line_bytes)))


def _workload_entry(doc: dict, index: int, default_seed: int) -> WorkloadEntry:
    app = str(doc.get("app", chr(ord("A") + index)))
    core = int(doc.get("core", index))
    if "trace" in doc:
        return WorkloadEntry(app=app, core=core, trace_path=str(doc["trace"]))
    if "kind" not in doc:
        raise ConfigError(f"workload[{index}]: needs either 'trace' or 'kind'")
    kind = str(doc["kind"])
    base = canonical_params(kind, seed=int(doc.get("seed", default_seed)),
                            app=app, core=core)
    overrides = {}
    if "pages" in doc:
        overrides["working_set_pages"] = int(doc["pages"])
    if "accesses" in doc:
        overrides["access_count"] = int(doc["accesses"])
    if "reuse" in doc:
        overrides["reuse"] = str(doc["reuse"])
    if "stride" in doc:
        overrides["stride"] = int(doc["stride"])
    if "zipf_s" in doc:
        overrides["zipf_s"] = float(doc["zipf_s"])
    if overrides:
        base = ArchetypeParams(kind=base.kind, seed=base.seed, app=app, core=core,
                               **{**{k: getattr(base, k) for k in
                                     ("working_set_pages", "access_count", "reuse",
                                      "stride", "zipf_s")}, **overrides})
    return WorkloadEntry(app=app, core=core, params=base)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    try:
        if "mapping" in doc:
            cfg.mapping = _mapping_from(doc["mapping"])
        hier = doc.get("hierarchy", {})
        if "private" in hier:
            cfg.private_cache = _cache_from(hier["private"], DEFAULT_PRIVATE)
        if "llc" in hier:
            cfg.llc = _cache_from(hier["llc"], DEFAULT_LLC)
        if "latencies" in hier:
            cfg.latencies = {**DEFAULT_LATENCIES,
                             **{k: int(v) for k, v in hier["latencies"].items()}}
        if "sampler" in doc:
            s = doc["sampler"]
            cfg.sampler = SamplerConfig(
                period=int(s.get("period", SamplerConfig.period)),
                bucket_weights=tuple(s["bucket_weights"]) if "bucket_weights" in s else None)
        if "thresholds" in doc:
            t = doc["thresholds"]
            defaults = Thresholds()
            cfg.thresholds = Thresholds(**{
                f: type(getattr(defaults, f))(t.get(f, getattr(defaults, f)))
                for f in ("hot_page_low", "hot_page_high", "wpd_low", "wpd_high",
                          "d_ccf_llct", "d_llch", "footprint_pages")})
        cfg.seed = int(doc.get("seed", 0))
        cfg.policy = str(doc.get("policy", "auto"))
        cfg.core_count = int(doc.get("core_count", 4))
        cfg.multithreaded = bool(doc.get("multithreaded", False))
        cfg.mix_chunk = int(doc.get("mix_chunk", 1))
        cfg.allow_fallback = bool(doc.get("allow_fallback", False))
        if "epoch" in doc and doc["epoch"]:
            cfg.epoch = int(doc["epoch"])
        if "total_pages" in doc and doc["total_pages"]:
            cfg.total_pages = int(doc["total_pages"])
        cfg.workload = [_workload_entry(w, i, cfg.seed)
                        for i, w in enumerate(doc.get("workload", []))]
        if "profile" in doc and doc["profile"]:
            cfg.profile = [(str(p["app"]), Category(str(p["category"]).upper()))
                           for p in doc["profile"]]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from None

    violations = validate_mapping(cfg.mapping)
    if violations:
        raise ConfigError("invalid mapping: " + "; ".join(violations))
    return cfg
