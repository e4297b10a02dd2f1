"""Policy heads: squashed Gaussians, radial flows, categoricals and their hybrid product."""
from .categorical import CategoricalHead, categorical_entropy, joint_log_probs
from .flows import (
    FlowTrace,
    RadialFlowParams,
    continuous_log_prob,
    flow_layers,
    flow_stack_sample,
    init_flow_params,
    radial_flow_forward,
    radial_flow_inverse,
)
from .gaussian import GaussianHead, SquashedSample, gaussian_entropy, gaussian_sample
from .hybrid import HybridHeads, hybrid_entropy_bonus, hybrid_log_prob
from .spec import INDEPENDENT, PER_DISCRETE_ACTION, Bounds, HybridAction, HybridActionSpec

__all__ = [
    "INDEPENDENT",
    "PER_DISCRETE_ACTION",
    "Bounds",
    "CategoricalHead",
    "FlowTrace",
    "GaussianHead",
    "HybridAction",
    "HybridActionSpec",
    "HybridHeads",
    "RadialFlowParams",
    "SquashedSample",
    "categorical_entropy",
    "continuous_log_prob",
    "flow_layers",
    "flow_stack_sample",
    "gaussian_entropy",
    "gaussian_sample",
    "hybrid_entropy_bonus",
    "hybrid_log_prob",
    "init_flow_params",
    "joint_log_probs",
    "radial_flow_forward",
    "radial_flow_inverse",
]
