"""Mixed-effect Dirichlet-tree multinomial modeling for longitudinal count data."""

__version__ = "0.1.0"

from .tree import PhyloTree, NodeCountTable, NewickError, parse_newick, aggregate_counts
from .series import SeriesTables, log_rising_sum, recip_rising_sum

__all__ = [
    "PhyloTree",
    "NodeCountTable",
    "NewickError",
    "parse_newick",
    "aggregate_counts",
    "SeriesTables",
    "log_rising_sum",
    "recip_rising_sum",
    "__version__",
]
