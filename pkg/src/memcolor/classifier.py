"""Application classification.

Offline oracle: run one app's trace twice through a fresh hierarchy, once
with the whole LLC and once confined to 1 of 8 cache color groups (pure
cache-only bits, so DRAM banks are untouched), and classify by the relative
proxy-cycle degradation plus the page footprint.

Online method: two periodic sampling jobs over the app's page table — one
counts hot pages via access-bit scan-and-clear, the other keeps per-page
access counters and summarizes them as a weighted page distribution (WPD,
bucket weight = log2 count-range index) — then thresholds on (mean hot
pages, WPD) pick the category.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from memcolor.allocator import Allocator
from memcolor.hierarchy import (DEFAULT_LATENCIES, DEFAULT_LLC,
                                DEFAULT_PRIVATE, MemoryHierarchy,
                                proxy_cycles, run_trace)
from memcolor.mapping import AddressMapping
from memcolor.policies import custom_spec


class ClassifierError(ValueError):
    pass


class Category(str, Enum):
    CCF = "CCF"      # fits private caches
    LLCT = "LLCT"    # thrashes the LLC, no reuse
    LLCM = "LLCM"    # moderately LLC sensitive
    LLCH = "LLCH"    # highly LLC sensitive


@dataclass(frozen=True)
class SamplerConfig:
    # Accesses per sampling interval.  Desk-scale traces are short, so the
    # default is 10^4; threshold defaults are calibrated at this period
    # (scripts/calibrate_thresholds.py) and hold for any period >= it.
    period: int = 10_000
    bucket_weights: tuple | None = None   # None -> weight(bucket b) = b

    def __post_init__(self):
        if self.period <= 0:
            raise ClassifierError("sampling period must be positive")

    def weight(self, bucket: int) -> float:
        if self.bucket_weights is not None:
            if bucket > len(self.bucket_weights):
                return self.bucket_weights[-1]
            return self.bucket_weights[bucket - 1]
        return float(bucket)


@dataclass
class OnlineEvidence:
    hot_pages: list = field(default_factory=list)
    access_counters: dict = field(default_factory=dict)

    def wpd(self, cfg: SamplerConfig) -> float:
        return job2_wpd(self.access_counters, cfg)

    def mean_hot_pages(self) -> float:
        if not self.hot_pages:
            raise ClassifierError("no completed sampling interval")
        return sum(self.hot_pages) / len(self.hot_pages)


@dataclass(frozen=True)
class Thresholds:
    # Online decision thresholds, calibrated on the synthetic archetype
    # corpus by scripts/calibrate_thresholds.py (grid search maximizing
    # agreement with the offline oracle).
    hot_page_low: float = 64.0
    hot_page_high: float = 128.0
    wpd_low: float = 1.2
    wpd_high: float = 6.0
    # Offline oracle cutoffs on relative proxy-cycle degradation.
    d_ccf_llct: float = 0.05
    d_llch: float = 0.20
    # Pages that fit the private cache (256 KiB / 4 KiB).
    footprint_pages: int = 64

    def __post_init__(self):
        if self.hot_page_low > self.hot_page_high:
            raise ClassifierError("hot_page_low must be <= hot_page_high")
        if self.wpd_low > self.wpd_high:
            raise ClassifierError("wpd_low must be <= wpd_high")
        for d in (self.d_ccf_llct, self.d_llch):
            if not 0 < d < 1:
                raise ClassifierError("degradation cutoffs must be in (0,1)")


def count_bucket(count: int) -> int:
    """Geometric bucket index of an access count: [1,2)->1, [2,4)->2, ..."""
    if count < 1:
        raise ClassifierError(f"count {count} outside bucket domain [1, inf)")
    return count.bit_length()


def job2_wpd(access_counters, cfg: SamplerConfig) -> float:
    """Weighted page distribution: mean bucket weight over touched pages."""
    counts = access_counters.values() if isinstance(access_counters, dict) else access_counters
    total = 0
    weighted = 0.0
    for c in counts:
        if c == 0:
            continue
        weighted += cfg.weight(count_bucket(c))
        total += 1
    if total == 0:
        raise ClassifierError("WPD undefined: no page was accessed")
    return weighted / total


class PageAccessSampler:
    """Online sampling driver: feed it every (app, vpn) access; it advances
    JOB2's per-page counters each access and runs JOB1's access-bit scan at
    each period boundary."""

    def __init__(self, allocator: Allocator, cfg: SamplerConfig | None = None):
        self.allocator = allocator
        self.cfg = cfg or SamplerConfig()
        self.evidence: dict[object, OnlineEvidence] = {}
        self._since_scan: dict[object, int] = {}

    def on_access(self, app_id, vpn: int):
        ev = self.evidence.get(app_id)
        if ev is None:
            ev = self.evidence[app_id] = OnlineEvidence()
            self._since_scan[app_id] = 0
        counters = ev.access_counters
        counters[vpn] = counters.get(vpn, 0) + 1
        n = self._since_scan[app_id] + 1
        if n >= self.cfg.period:
            self.job1_step(app_id)
            n = 0
        self._since_scan[app_id] = n

    def job1_step(self, app_id) -> int:
        hot = self.allocator.access_bit_scan_and_clear(app_id)
        self.evidence.setdefault(app_id, OnlineEvidence()).hot_pages.append(hot)
        return hot

    def evidence_json(self, app_id, thresholds: Thresholds) -> str:
        ev = self.evidence[app_id]
        return json.dumps({
            "app": str(app_id),
            "hot_pages": ev.hot_pages,
            "wpd": ev.wpd(self.cfg),
            "category": classify_online(ev, thresholds, self.cfg).value,
            "thresholds_used": {
                "hot_page_low": thresholds.hot_page_low,
                "hot_page_high": thresholds.hot_page_high,
                "wpd_low": thresholds.wpd_low,
                "wpd_high": thresholds.wpd_high,
            },
        }, sort_keys=True, indent=2)


def classify_online(evidence: OnlineEvidence, thresholds: Thresholds,
                    cfg: SamplerConfig | None = None) -> Category:
    """Threshold decision over (mean hot pages, WPD); ties take the >= branch."""
    cfg = cfg or SamplerConfig()
    h = evidence.mean_hot_pages()
    w = evidence.wpd(cfg)
    if h <= thresholds.hot_page_low:
        return Category.CCF
    if h >= thresholds.hot_page_high:
        if w <= thresholds.wpd_low:
            return Category.LLCT
        if w >= thresholds.wpd_high:
            return Category.LLCH
    return Category.LLCM


def cache_quota_spec(m: AddressMapping):
    """Pseudo-policy coloring pages over the cache-only bits: partitions the
    LLC into 2^|c_bits| groups without touching the bank index."""
    return custom_spec(sorted(m.c_bits), m)


@dataclass(frozen=True)
class OfflineResult:
    category: Category
    degradation: float
    footprint_pages: int
    proxy_full: int
    proxy_confined: int


def classify_offline(trace, m: AddressMapping,
                     private_cfg=DEFAULT_PRIVATE, llc_cfg=DEFAULT_LLC,
                     latencies=None, thresholds: Thresholds | None = None,
                     total_pages: int | None = None) -> OfflineResult:
    """Cache-quota oracle: full-LLC run vs 1-of-8-groups run.

    DRAM outcome latencies are flattened to the row-miss cost for the two
    oracle runs: confining frames to one cache color also spreads them over
    more rows, and that placement artifact must not leak into a metric that
    is supposed to measure cache-quota sensitivity alone.
    """
    if not trace:
        raise ClassifierError("empty trace")
    thresholds = thresholds or Thresholds()
    base = dict(latencies or DEFAULT_LATENCIES)
    flat = base["row_miss"]
    latencies = {**base, "row_hit": flat, "row_conflict": flat}
    total_pages = total_pages or m.total_pages
    spec = cache_quota_spec(m)
    apps = {r.app for r in trace}
    if len(apps) != 1:
        raise ClassifierError(f"offline oracle expects a single-app trace, got {sorted(apps)}")
    (app,) = apps

    def run(colors):
        alloc = Allocator(total_pages, spec, m)
        alloc.assign_quota(app, colors)
        hier = MemoryHierarchy(m, private_cfg, llc_cfg, latencies)
        metrics, _ = run_trace(trace, alloc, hier)
        return proxy_cycles(metrics, latencies)

    full = run(range(spec.page_colors))
    confined = run([c for c in range(spec.page_colors) if spec.project(c)[0] == 0])
    d = (confined - full) / full
    footprint = len({r.vaddr >> m.page_offset_bits for r in trace})

    if d < thresholds.d_ccf_llct:
        cat = Category.CCF if footprint <= thresholds.footprint_pages else Category.LLCT
    elif d >= thresholds.d_llch:
        cat = Category.LLCH
    else:
        cat = Category.LLCM
    return OfflineResult(cat, d, footprint, full, confined)


def classify_trace_online(trace, m: AddressMapping,
                          cfg: SamplerConfig | None = None,
                          thresholds: Thresholds | None = None,
                          private_cfg=DEFAULT_PRIVATE, llc_cfg=DEFAULT_LLC,
                          latencies=None, total_pages: int | None = None,
                          seed: int = 0):
    """Run a single-app trace solo (no color constraint) with the sampler
    attached and classify from the collected evidence.

    Returns (Category, OnlineEvidence, PageAccessSampler).
    """
    from memcolor.policies import PolicyKind, policy_spec
    cfg = cfg or SamplerConfig()
    thresholds = thresholds or Thresholds()
    apps = {r.app for r in trace}
    if len(apps) != 1:
        raise ClassifierError(f"online classification expects a single-app trace, got {sorted(apps)}")
    (app,) = apps
    alloc = Allocator(total_pages or m.total_pages,
                      policy_spec(PolicyKind.INTERLEAVE, m), m, seed=seed)
    alloc.register(app)
    hier = MemoryHierarchy(m, private_cfg, llc_cfg, latencies)
    sampler = PageAccessSampler(alloc, cfg)
    run_trace(trace, alloc, hier, observer=sampler)
    ev = sampler.evidence[app]
    return classify_online(ev, thresholds, cfg), ev, sampler
