"""Exact tropical analysis of KP line solitons.

The package works with rational soliton parameters throughout: critical
values, visibility of vertices, evolution of soliton trees through Tamari
rotations, the M = 5 region tables, wedge-product solutions with certified
log comparisons, and raster/SVG rendering with exact tie resolution.
"""

from .errors import (ConfigError, ConsistencyError, DegenerateEvent, InvalidInput, KPTropError,
                     ResourceGuard)
from .model import SolitonConfig, all_phases, config_from_json, resolve_offsets, validate_config
from .critical import critical_point, critical_value, order_critical_values
from .visibility import is_visible, prune_level, visible_sets
from .evolution import classify_evolution, t4_order_region, table_conditions, tree_at_event
from .combinatorics import permutohedron, tamari, tamari_chains
from .general import build_tau, parallel_events, p_limit, wedge_spec
from .render import bounded_regions, exact_u, render_svg, tropical_field

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConsistencyError", "DegenerateEvent", "InvalidInput", "KPTropError",
    "ResourceGuard", "SolitonConfig", "all_phases", "config_from_json", "resolve_offsets",
    "validate_config", "critical_point", "critical_value", "order_critical_values",
    "is_visible", "prune_level", "visible_sets", "classify_evolution", "t4_order_region",
    "table_conditions", "tree_at_event", "permutohedron", "tamari", "tamari_chains",
    "build_tau", "parallel_events", "p_limit", "wedge_spec", "exact_u", "render_svg",
    "tropical_field", "bounded_regions", "__version__",
]
