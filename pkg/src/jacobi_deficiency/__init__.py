"""Finite-depth criteria and numerical probes for deficiency indices of block Jacobi matrices."""

from .coeffs import (BandSpec, BlockPair, CoefficientError, CoefficientSequence, band_to_block, block_to_band,
                     make_family, random_blocks, read_block_table, scalar_sequence)
from .criteria import CriterionVerdict
from .kernel import KernelTable, k_direct, k_recursive
from .oracle import DeficiencyEstimate, complete_indeterminacy_probe, deficiency_estimate, scalar_indeterminacy
from .polys import SolutionSequence, first_kind, second_kind
from .powers import PowerBand, k2_limsup, power_coeffs, power_consistency_probe
from .trend import TrendClassifier

__version__ = "0.1.0"

__all__ = [
    "BandSpec", "BlockPair", "CoefficientError", "CoefficientSequence", "CriterionVerdict", "DeficiencyEstimate",
    "KernelTable", "PowerBand", "SolutionSequence", "TrendClassifier", "band_to_block", "block_to_band",
    "complete_indeterminacy_probe", "deficiency_estimate", "first_kind", "k2_limsup", "k_direct", "k_recursive",
    "make_family", "power_coeffs", "power_consistency_probe", "random_blocks", "read_block_table",
    "scalar_indeterminacy", "scalar_sequence", "second_kind",
]
