"""Relay channels with confidential messages: regions, secrecy capacities, simulation."""

from .channel import (
    AuxInput,
    AuxInputP2,
    AuxInputV,
    ClassificationReport,
    JointDist,
    RelayChannel,
    classify,
    make_joint,
    validate_channel,
)
from .gaussian import GaussianRegion, GaussianSpec, gaussian_membership, gaussian_secrecy_capacity
from .info import cond_mutual_information, delta_gap, entropy, information_density, positive_part, zeta
from .regions import BoundId, RateTriple, Section, constraint_check
from .search import (
    SearchConfig,
    boundary_trace,
    inner_membership,
    outer_violation,
    secrecy_capacity_bounds,
)
from .simulator import SimConfig, SimReport, simulate

__version__ = "0.1.0"
