"""Hausdorff-measure covers, gauge algebra, and a constructive space-filling
map that sends a perfect null set onto a length-compact target."""

from ._jit import backend, set_backend, use_backend
from .blowup import (BlowupReport, HilbertCurve, blowup_demo, hilbert_eval,
                     holder_exponent, preimage)
from .covers import (CoverEstimate, DimensionEstimate, box_dimension, certified_bounds,
                     greedy_disjoint_subsets, grid_cover, measure_upper_profile,
                     separated_net)
from .errors import HausfillError
from .filler import (BallSystem, BumpFunction, FillingMap, PerfectSetDescriptor,
                     build_filling, bump, eval_filling, null_set_report, select_balls,
                     surjectivity_gap)
from .hfun import (EMPTY, HausdorffFunction, dimension_function, exp_inv,
                   finite_order_check, parse_gauge, power, precedes, premeasure_eval)
from .sets import SetSample, cantor_set, parse_set, unit_interval, unit_square
from .spaces import (Circle, EuclideanCube, NetHierarchy, Polyline, SinglePoint,
                     SnowflakeCube, build_net_hierarchy, connect, parse_space)

__version__ = "0.1.0"
