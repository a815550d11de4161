"""Adaptive random-scan Gibbs samplers, ergodicity constants and the worked
models that exercise them."""
from __future__ import annotations

from .core import (
    AdaptationRule,
    ConstantRule,
    FiniteProductModel,
    FiniteTargetModel,
    FunctionRule,
    History,
    LatticeRandomWalk,
    ProductState,
    ProposalFamily,
    SelectionProbs,
    TargetModel,
    project_to_simplex,
    substream,
    validate_selection_probs,
)
from .errors import AdaptiveGibbsError
from .samplers import ChainTrace, mwg_step, rsg_step, run_adaptive_chain

__all__ = [
    "AdaptationRule",
    "AdaptiveGibbsError",
    "ChainTrace",
    "ConstantRule",
    "FiniteProductModel",
    "FiniteTargetModel",
    "FunctionRule",
    "History",
    "LatticeRandomWalk",
    "ProductState",
    "ProposalFamily",
    "SelectionProbs",
    "TargetModel",
    "mwg_step",
    "project_to_simplex",
    "rsg_step",
    "run_adaptive_chain",
    "substream",
    "validate_selection_probs",
]
