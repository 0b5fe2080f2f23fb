"""Exact computation on finite pointed metric spaces."""

from .metric_core import (
    DomainError,
    FiniteMetricSpace,
    MetricError,
    PointedSpace,
    PreconditionError,
    ShapeError,
    ball,
    greedy_net,
    hausdorff_distance,
    is_net,
    is_separated,
    validate_metric,
)
from .coupling import (
    Correspondence,
    Coupling,
    compose_couplings,
    correspondence_distortion,
    coupling_from_correspondence,
    coupling_objective,
    restricted_hausdorff,
    validate_coupling,
)
from .gromov_space import (
    EntourageCertificate,
    entourage_bound,
    gh_distance,
    oracle_min_objective,
    pointed_gh_distance,
)
from .coarse_geometry import (
    Bijection,
    QICertificate,
    best_bijection,
    distortion,
    qi_search,
    relation_check,
)
from .reduction_lab import ConstructionConfig, SpikeSequence, build_gh_instance, build_qi_instance

__version__ = "0.1.0"
