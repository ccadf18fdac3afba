"""Counterfactual homogamy decompositions and survey pseudo-panel tests."""

from .decomposition import CounterfactualSpec, DecompositionResult, counterfactual, decompose_change, granularity_sensitivity
from .ipf import IpfConfig, IpfReport, ipf_transform
from .nm import NmReport, nm_transform
from .table import (
    COL,
    ROW,
    AssociationMatrix,
    ContingencyTable,
    MarginSpec,
    generalized_ll,
    homogamy_share,
    liu_lu,
    make_table,
    margins_of,
    merge_adjacent,
    odds_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "COL",
    "ROW",
    "AssociationMatrix",
    "ContingencyTable",
    "CounterfactualSpec",
    "DecompositionResult",
    "IpfConfig",
    "IpfReport",
    "MarginSpec",
    "NmReport",
    "counterfactual",
    "decompose_change",
    "generalized_ll",
    "granularity_sensitivity",
    "homogamy_share",
    "ipf_transform",
    "liu_lu",
    "make_table",
    "margins_of",
    "merge_adjacent",
    "nm_transform",
    "odds_ratio",
]
