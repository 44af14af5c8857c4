"""Lifetime maximization for weak barrier coverage with unit-disk sensors."""
from .barrier import Cover, GridContext, bfs_cover, is_grid_cover, is_minimal, minmax_cover, strip_half_width
from .field import SensorField, generate_field, lifetime_upper_bound, region_depth
from .flow import build_flow_network, decompose_paths, max_flow_oracle, to_standard_lp
from .geometry import Disk, Point, Segment, Strip, build_adjacency_graph
from .grids import Grid, GridFamily, hex_grid, shift_family, square_grid, total_edge_length
from .harness import ExperimentConfig, run_sweep
from .lp import LPProblem, LPSolution, solve_lp
from .random_seeds import random_seeds_cover, random_seeds_lifetime
from .scheduling import (ScheduleEntry, ScheduleResult, activate_nonpreemptive, activate_nonuniform,
                         activate_uniform, grid_based_lifetime)
from .verification import HoleReport, rasterize, verify_kappa_weak

__version__ = "0.1.0"
