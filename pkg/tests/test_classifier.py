import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memcolor.allocator import Allocator
from memcolor.classifier import (Category, ClassifierError, OnlineEvidence,
                                 PageAccessSampler, SamplerConfig, Thresholds,
                                 classify_offline, classify_online,
                                 classify_trace_online, count_bucket, job2_wpd)
from memcolor.mapping import AddressMapping
from memcolor.policies import PolicyKind, policy_spec
from memcolor.workloads import ArchetypeParams, canonical_params, gen

M = AddressMapping()
CFG = SamplerConfig()
TH = Thresholds()


def oracle_wpd(counts):
    """Brute-force bucketing: enumerate geometric ranges explicitly."""
    ranges = [(2 ** (b - 1), 2 ** b, b) for b in range(1, 40)]
    weights = []
    for c in counts:
        if c == 0:
            continue
        for lo, hi, w in ranges:
            if lo <= c < hi:
                weights.append(w)
                break
    return sum(weights) / len(weights)


def test_count_bucket_edges():
    assert count_bucket(1) == 1
    assert count_bucket(2) == 2
    assert count_bucket(3) == 2
    assert count_bucket(4) == 3
    with pytest.raises(ClassifierError):
        count_bucket(0)


def test_wpd_all_single_access():
    assert job2_wpd({1: 1, 2: 1, 3: 1}, CFG) == 1.0


def test_wpd_convex_combination():
    # half the pages in bucket 1, half in bucket 3
    assert job2_wpd({0: 1, 1: 1, 2: 4, 3: 5}, CFG) == 2.0


def test_wpd_matches_oracle():
    counters = {i: c for i, c in enumerate([1, 1, 5, 9])}
    assert job2_wpd(counters, CFG) == oracle_wpd(counters.values())


def test_wpd_all_zero_errors():
    with pytest.raises(ClassifierError):
        job2_wpd({1: 0}, CFG)


@given(st.lists(st.integers(min_value=1, max_value=10 ** 6), min_size=1, max_size=50))
@settings(max_examples=200)
def test_wpd_properties(counts):
    counters = dict(enumerate(counts))
    w = job2_wpd(counters, CFG)
    assert w == pytest.approx(oracle_wpd(counts))
    # permutation invariance
    rev = dict(enumerate(reversed(counts)))
    assert job2_wpd(rev, CFG) == pytest.approx(w)
    # duplicating every page leaves wpd unchanged
    doubled = dict(enumerate(counts + counts))
    assert job2_wpd(doubled, CFG) == pytest.approx(w)


def test_classify_online_rules():
    th = Thresholds(hot_page_low=10, hot_page_high=100, wpd_low=1.5, wpd_high=6)

    def ev(h, counts):
        return OnlineEvidence(hot_pages=[h], access_counters=dict(enumerate(counts)))

    assert classify_online(ev(5, [1]), th) is Category.CCF
    assert classify_online(ev(200, [1, 1]), th) is Category.LLCT
    assert classify_online(ev(200, [100, 100]), th) is Category.LLCH
    assert classify_online(ev(200, [4, 4]), th) is Category.LLCM
    assert classify_online(ev(50, [1]), th) is Category.LLCM
    # boundary takes the >= branch
    assert classify_online(ev(100, [1]), th) is Category.LLCT


def test_classify_online_no_evidence():
    with pytest.raises(ClassifierError):
        classify_online(OnlineEvidence(), TH)


def test_sampler_job1_intervals():
    spec = policy_spec(PolicyKind.INTERLEAVE, M)
    alloc = Allocator(4096, spec, M)
    alloc.register("A")
    sampler = PageAccessSampler(alloc, SamplerConfig(period=10))
    for i in range(30):
        vpn = i % 7
        alloc.touch("A", vpn)
        sampler.on_access("A", vpn)
    ev = sampler.evidence["A"]
    assert len(ev.hot_pages) == 3
    assert ev.hot_pages[0] == 7
    assert sum(ev.access_counters.values()) == 30


def test_streaming_hot_pages_per_interval():
    # line-stride stream: ~ period * 64/4096 pages per interval
    spec = policy_spec(PolicyKind.INTERLEAVE, M)
    alloc = Allocator(M.total_pages, spec, M)
    alloc.register("A")
    sampler = PageAccessSampler(alloc, SamplerConfig(period=1000))
    for i in range(4000):
        vpn = (i * 64) // 4096
        alloc.touch("A", vpn)
        sampler.on_access("A", vpn)
    hot = sampler.evidence["A"].hot_pages
    assert len(hot) == 4
    assert all(15 <= h <= 17 for h in hot)


def test_offline_empty_trace():
    with pytest.raises(ClassifierError):
        classify_offline([], M)


def test_offline_ccf():
    res = classify_offline(gen(canonical_params("ccf", seed=1)), M)
    assert res.category is Category.CCF
    assert res.degradation < TH.d_ccf_llct
    assert res.footprint_pages <= TH.footprint_pages


def test_offline_llct_insensitive_but_huge():
    res = classify_offline(gen(canonical_params("llct", seed=1)), M)
    assert res.category is Category.LLCT
    assert abs(res.degradation) < TH.d_ccf_llct
    assert res.footprint_pages > TH.footprint_pages


def test_offline_llch_quota_sensitive():
    res = classify_offline(gen(canonical_params("llch", seed=1)), M)
    assert res.category is Category.LLCH
    assert res.degradation >= TH.d_llch


def test_offline_monotone_in_llch_working_set():
    degradations = []
    for pages in (256, 512, 1024):
        p = ArchetypeParams("llch", pages, pages * 64 * 2, reuse="loop",
                            stride=64, seed=1)
        degradations.append(classify_offline(gen(p), M).degradation)
    assert degradations == sorted(degradations)


def test_online_offline_agree_on_archetypes():
    for kind in ("ccf", "llct", "llcm", "llch"):
        trace = gen(canonical_params(kind, seed=7))
        off = classify_offline(trace, M)
        on, _, _ = classify_trace_online(trace, M)
        assert on is off.category
        assert on.value == kind.upper()


def test_evidence_json(tmp_path):
    trace = gen(canonical_params("ccf", seed=1))
    _, _, sampler = classify_trace_online(trace, M)
    doc = sampler.evidence_json("A", TH)
    assert '"category": "CCF"' in doc
    assert '"hot_pages"' in doc and '"wpd"' in doc


def test_threshold_validation():
    with pytest.raises(ClassifierError):
        Thresholds(hot_page_low=10, hot_page_high=5)
    with pytest.raises(ClassifierError):
        Thresholds(d_ccf_llct=1.5)
