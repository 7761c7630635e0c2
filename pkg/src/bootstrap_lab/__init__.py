"""Two-dimensional monotone cellular automata: closures, classification,
Duarte droplet geometry, spanning, and Monte Carlo threshold experiments."""

from .families import Site, UpdateFamily, UpdateRule, builtin_family, parse_family
from .lattice import (LatticeState, Torus, Window, closure, closure_by_sweeps,
                      percolates, step)
from .stability import (Arc, DifficultyEstimate, FamilyClassification,
                        SearchBudget, StableSetDescription, classify,
                        difficulty, directional_difficulty, is_stable,
                        stable_set)
from .droplets import (Droplet, DuarteRegion, GrowthParams, droplet_shape_census,
                       enumerate_droplet_shapes, is_bichain, minimal_droplet,
                       minimal_region, region_contains)
from .spanning import (CriticalPair, SpanTrace, critical_pair, extract_subdroplet,
                       internally_spanned, span, span_via_components,
                       strong_components, strongly_connected)
from .lab import (GrowthStageReport, PcEstimate, RunManifest, TrialPlan,
                  estimate_pc, growth_construction, no_empty_line_check,
                  sample_percolation, scaling_sweep)
from .errors import GuardError, MemoryGuardError, WindowBudgetError

__version__ = "0.1.0"

__all__ = [
    "Site", "UpdateRule", "UpdateFamily", "builtin_family", "parse_family",
    "Torus", "Window", "LatticeState", "step", "closure", "closure_by_sweeps",
    "percolates",
    "Arc", "StableSetDescription", "SearchBudget", "DifficultyEstimate",
    "FamilyClassification", "is_stable", "stable_set", "difficulty",
    "directional_difficulty", "classify",
    "GrowthParams", "DuarteRegion", "Droplet", "minimal_region",
    "minimal_droplet", "region_contains", "enumerate_droplet_shapes",
    "droplet_shape_census", "is_bichain",
    "strongly_connected", "strong_components", "span", "span_via_components",
    "SpanTrace", "internally_spanned", "extract_subdroplet", "critical_pair",
    "CriticalPair",
    "TrialPlan", "RunManifest", "sample_percolation", "estimate_pc",
    "scaling_sweep", "growth_construction", "no_empty_line_check",
    "PcEstimate", "GrowthStageReport",
    "GuardError", "WindowBudgetError", "MemoryGuardError",
]
