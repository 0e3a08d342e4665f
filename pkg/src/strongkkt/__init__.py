"""Strong subdifferentials, level-set normal cones and generalized KKT certificates."""

from .convexsets import RealSet1D, SetOracle
from .funcspace import FnModel, LimitSchedule, catalog_ids, catalog_instantiate
from .strongsub import SubdiffSpec, classical_subdiff_1d, strong_interval_1d, strong_member

__all__ = [
    "FnModel",
    "LimitSchedule",
    "RealSet1D",
    "SetOracle",
    "SubdiffSpec",
    "catalog_ids",
    "catalog_instantiate",
    "classical_subdiff_1d",
    "strong_interval_1d",
    "strong_member",
]
