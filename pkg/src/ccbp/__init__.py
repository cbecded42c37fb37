"""Exact-arithmetic verification lab for cardinality-constrained bin packing."""

from .core import Instance, Item, OptCertificate, Packing, lower_bound, lower_bounds, validate_packing
from .exact import batched_cost, brute_force, certify, clustered_cost, optimal, repack_batched
from .generators import GeneratedScenario, generate
from .harness import RunReport, fuzz, run, sweep

__all__ = [
    "GeneratedScenario", "Instance", "Item", "OptCertificate", "Packing", "RunReport", "batched_cost",
    "brute_force", "certify", "clustered_cost", "fuzz", "generate", "lower_bound", "lower_bounds", "optimal",
    "repack_batched", "run", "sweep", "validate_packing",
]
__version__ = "0.1.0"
