"""Trace-driven page-coloring simulator: address mapping, partitioning
policies, color-constrained page allocation, a cache/DRAM hierarchy model,
online workload classification and a policy decision tree."""

from memcolor.mapping import AddressMapping, decompose, page_color, validate_mapping
from memcolor.policies import PolicyKind, PolicySpec, policy_spec

__all__ = [
    "AddressMapping",
    "decompose",
    "page_color",
    "validate_mapping",
    "PolicyKind",
    "PolicySpec",
    "policy_spec",
]
