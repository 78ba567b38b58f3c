"""Optimal-transport core: cost matrices, exact EMD, Sinkhorn, WRD."""

from ._backend import backend_name, get_kernels, kernels
from .core import (
    CostMatrix,
    OTResult,
    TransportPlan,
    cost_matrix,
    emd_exact,
    epsilon_for,
    sinkhorn,
    wmd,
    wrd,
)

__all__ = [
    "CostMatrix",
    "OTResult",
    "TransportPlan",
    "backend_name",
    "cost_matrix",
    "emd_exact",
    "epsilon_for",
    "get_kernels",
    "kernels",
    "sinkhorn",
    "wmd",
    "wrd",
]
