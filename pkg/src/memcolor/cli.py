"""Command-line experiment driver.

Subcommands: gen, run, classify, advise, sweep.
Exit codes: 0 ok, 1 usage, 2 invalid config, 3 simulation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from memcolor.advisor import (WorkloadProfile, advise, apply_decision,
                              decide_policy, plan_quotas)
from memcolor.allocator import AllocationError, Allocator
from memcolor.classifier import (ClassifierError, PageAccessSampler,
                                 classify_offline, classify_online,
                                 classify_trace_online)
from memcolor.config import ConfigError, ExperimentConfig, load_config
from memcolor.hierarchy import (MemoryHierarchy, SimulationError, proxy_cycles,
                                run_trace)
from memcolor.mapping import MappingError
from memcolor.policies import (PARTITIONING_KINDS, PolicyError, PolicyKind,
                               policy_spec)
from memcolor.workloads import (ArchetypeParams, TraceError, canonical_params,
                                gen, mix, read_trace, write_trace)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_POLICIES = [PolicyKind.INTERLEAVE, PolicyKind.BANK_ONLY, PolicyKind.A_VP,
                  PolicyKind.B_VP, PolicyKind.C_VP, PolicyKind.RANDOM]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_traces(cfg: ExperimentConfig) -> dict:
    traces = {}
    for entry in cfg.workload:
        if entry.trace_path:
            trace = read_trace(entry.trace_path)
            trace = [r._replace(app=entry.app, core=entry.core) for r in trace]
        else:
            trace = gen(entry.params)
        if entry.app in traces:
            raise ConfigError(f"duplicate app id {entry.app!r} in workload")
        traces[entry.app] = trace
    if not traces:
        raise ConfigError("workload list is empty")
    return traces


def _even_split_quotas(spec, apps):
    """Round-robin color split for an explicitly named policy."""
    n_colors = spec.page_colors
    if len(apps) <= n_colors:
        return {a: tuple(c for c in range(n_colors) if c % len(apps) == i)
                for i, a in enumerate(apps)}
    return {a: (i % n_colors,) for i, a in enumerate(apps)}


def _classify_all(cfg: ExperimentConfig, traces):
    results = {}
    for app, trace in traces.items():
        cat, ev, sampler = classify_trace_online(
            trace, cfg.mapping, cfg=cfg.sampler, thresholds=cfg.thresholds,
            private_cfg=cfg.private_cache, llc_cfg=cfg.llc,
            latencies=cfg.latencies, total_pages=cfg.resolved_total_pages(),
            seed=cfg.seed)
        results[app] = (cat, ev)
    return results


def _profile(cfg: ExperimentConfig, traces):
    if cfg.profile:
        apps = tuple(cfg.profile)
        evidence = {str(a): {"category": c.value, "source": "profile"} for a, c in apps}
        return (WorkloadProfile(apps, multithreaded=cfg.multithreaded,
                                core_count=cfg.core_count), evidence)
    classified = _classify_all(cfg, traces)
    apps = tuple((a, cat) for a, (cat, _) in classified.items())
    evidence = {str(a): {"category": cat.value,
                         "hot_pages": list(ev.hot_pages),
                         "wpd": ev.wpd(cfg.sampler)}
                for a, (cat, ev) in classified.items()}
    return (WorkloadProfile(apps, multithreaded=cfg.multithreaded,
                            core_count=cfg.core_count), evidence)


def _run_one_policy(cfg: ExperimentConfig, traces, policy: PolicyKind,
                    quotas=None, log_alloc=False):
    spec = policy_spec(policy, cfg.mapping)
    alloc = Allocator(cfg.resolved_total_pages(), spec, cfg.mapping,
                      seed=cfg.seed, allow_fallback=cfg.allow_fallback,
                      log=log_alloc)
    if spec.partitioning:
        quotas = quotas or _even_split_quotas(spec, list(traces))
        for app, colors in quotas.items():
            alloc.assign_quota(app, colors)
    else:
        for app in traces:
            alloc.register(app)
    hier = MemoryHierarchy(cfg.mapping, cfg.private_cache, cfg.llc, cfg.latencies)
    merged = mix(list(traces.values()), k=cfg.mix_chunk, core_count=cfg.core_count)
    metrics, snapshots = run_trace(merged, alloc, hier, epoch=cfg.epoch)
    return metrics, snapshots, alloc


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


# --- subcommands -----------------------------------------------------------

def cmd_gen(args) -> int:
    params = ArchetypeParams(
        kind=args.kind,
        working_set_pages=args.pages or canonical_params(args.kind).working_set_pages,
        access_count=args.accesses or canonical_params(args.kind).access_count,
        reuse=args.reuse or canonical_params(args.kind).reuse,
        stride=args.stride or canonical_params(args.kind).stride,
        zipf_s=args.zipf_s, seed=args.seed, app=args.app)
    write_trace(gen(params), args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    traces = _load_traces(cfg)
    out = args.out or "."
    written = []
    try:
        if cfg.policy == "auto":
            profile, evidence = _profile(cfg, traces)
            decision = advise(profile, cfg.mapping)
            policy = decision.policy
            quotas = decision.quotas if any(decision.quotas.values()) else None
            path = os.path.join(out, "decision.json")
            _write(path, decision.to_json(evidence))
            written.append(path)
        else:
            policy = PolicyKind.from_name(cfg.policy)
            quotas = None

        metrics, snapshots, alloc = _run_one_policy(cfg, traces, policy,
                                                    quotas=quotas, log_alloc=True)
        path = os.path.join(out, "metrics.json")
        _write(path, metrics.to_json(cfg.latencies))
        written.append(path)
        path = os.path.join(out, "alloc.csv")
        alloc.write_alloc_csv(path)
        written.append(path)
        if snapshots:
            path = os.path.join(out, "epochs.json")
            _write(path, json.dumps(snapshots, sort_keys=True, indent=2))
            written.append(path)
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    print(f"policy={policy.value} proxy_cycles={proxy_cycles(metrics, cfg.latencies)}")
    return EXIT_OK


def cmd_classify(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    traces = _load_traces(cfg)
    out = {}
    for app, trace in traces.items():
        if args.method == "offline":
            res = classify_offline(trace, cfg.mapping, cfg.private_cache, cfg.llc,
                                   cfg.latencies, cfg.thresholds,
                                   cfg.resolved_total_pages())
            out[app] = {"category": res.category.value,
                        "degradation": res.degradation,
                        "footprint_pages": res.footprint_pages}
        else:
            cat, ev, sampler = classify_trace_online(
                trace, cfg.mapping, cfg=cfg.sampler, thresholds=cfg.thresholds,
                private_cfg=cfg.private_cache, llc_cfg=cfg.llc,
                latencies=cfg.latencies, total_pages=cfg.resolved_total_pages(),
                seed=cfg.seed)
            out[app] = {"category": cat.value,
                        "hot_pages": list(ev.hot_pages),
                        "wpd": ev.wpd(cfg.sampler)}
    text = json.dumps(out, sort_keys=True, indent=2)
    if args.out:
        _write(os.path.join(args.out, "classify.json"), text)
    print(text)
    return EXIT_OK


def cmd_advise(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    traces = _load_traces(cfg) if cfg.workload else {}
    if not traces and not cfg.profile:
        raise ConfigError("advise needs either a workload list or a profile")
    profile, evidence = _profile(cfg, traces)
    decision = advise(profile, cfg.mapping)
    text = decision.to_json(evidence)
    if args.out:
        _write(os.path.join(args.out, "decision.json"), text)
    print(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    _apply_overrides(cfg, args)
    traces = _load_traces(cfg)
    profile, evidence = _profile(cfg, traces)
    pdt_policy = decide_policy(profile)

    rows = []
    results = {}
    for policy in SWEEP_POLICIES:
        try:
            spec = policy_spec(policy, cfg.mapping)
            quotas = None
            if spec.partitioning:
                quotas = plan_quotas(profile, policy, spec).quotas
            metrics, _, _ = _run_one_policy(cfg, traces, policy, quotas=quotas)
            proxy = proxy_cycles(metrics, cfg.latencies)
            results[policy.value] = proxy
            rows.append([policy.value, proxy,
                         metrics.total["cross_app_conflicts"],
                         metrics.total["cross_app_llc_evictions"],
                         f"{metrics.llc_miss_rate():.6f}", "ok"])
        except (PolicyError, AllocationError, SimulationError, MappingError) as exc:
            rows.append([policy.value, "", "", "", "", f"failed: {exc}"])

    if not results:
        raise SimulationError("every sweep cell failed")
    best = min(sorted(results), key=lambda p: results[p])
    report = {
        "per_policy": results,
        "best_policy": best,
        "pdt_policy": pdt_policy.value,
        "agreement": best == pdt_policy.value,
        "evidence": evidence,
    }
    out = args.out or "."
    _write(os.path.join(out, "sweep.csv"),
           "\n".join([",".join(["policy", "proxy_cycles", "cross_app_conflicts",
                                "cross_app_llc_evictions", "llc_miss_rate", "status"])]
                     + [",".join(str(c) for c in r) for r in rows]) + "\n")
    _write(os.path.join(out, "sweep.json"), json.dumps(report, sort_keys=True, indent=2))
    print(json.dumps(report, sort_keys=True, indent=2))
    return EXIT_OK


def _apply_overrides(cfg: ExperimentConfig, args):
    if getattr(args, "policy", None):
        cfg.policy = args.policy
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed


def build_parser() -> _Parser:
    parser = _Parser(prog="memcolor",
                     description="page-coloring memory hierarchy simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic archetype trace")
    p_gen.add_argument("--kind", required=True, choices=["ccf", "llct", "llcm", "llch"])
    p_gen.add_argument("--pages", type=int, default=None)
    p_gen.add_argument("--accesses", type=int, default=None)
    p_gen.add_argument("--reuse", choices=["none", "loop", "zipf"], default=None)
    p_gen.add_argument("--stride", type=int, default=None)
    p_gen.add_argument("--zipf-s", dest="zipf_s", type=float, default=0.8)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--app", default="A")
    p_gen.add_argument("-o", "--output", required=True)
    p_gen.set_defaults(func=cmd_gen)

    for name, func, extra in (("run", cmd_run, True), ("classify", cmd_classify, False),
                              ("advise", cmd_advise, False), ("sweep", cmd_sweep, False)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        if extra:
            p.add_argument("--policy", default=None,
                           help="override the config's policy (name or 'auto')")
        if name == "classify":
            p.add_argument("--method", choices=["online", "offline"], default="online")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, PolicyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TraceError, ClassifierError, AllocationError, SimulationError,
            MappingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
