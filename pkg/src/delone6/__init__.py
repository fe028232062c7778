"""Local rotational symmetry of Delone sets in three dimensions.

Builds 2R-clusters, finds their rotation axes, classifies points into
the subsets X6, K and Y, and walks off-axial chains.
"""

__version__ = "0.1.0"

from .pointset import (BoundaryError, Box, Cluster, PointSet, PointSetError, Shell, ToleranceModel,
                       build_point_set, cluster_at, point_line_distance, shells_of)
from .delone import (DeloneParams, EmptySubsetError, covering_radius, estimate_params, packing_radius,
                     verify_delone)
from .symmetry import (Axis, LocalGroupInfo, Membership, RankDeficientError, SymmetryError, axis_order,
                       candidate_axes, classify_point, detect_axes, group_info, local_group)
from .chains import (Chain, ChainError, DecayReport, build_chain, chain_length_bound, next_chain_point,
                     verify_decay)
from .generators import GeneratorSpec, Sample, SpecError, generate
from .analysis import AnalysisConfig, AnalysisError, analyze, prepare, run_chains, run_probes
from .io import read_points, write_points

__all__ = [name for name, obj in globals().items()
           if not name.startswith("_") and not isinstance(obj, type(__import__("sys")))]
