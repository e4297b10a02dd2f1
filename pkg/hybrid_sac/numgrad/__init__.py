"""Reverse-mode differentiation, dense networks, Adam and checkpoints."""
from .adam import AdamState, adam_step
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckResult, check_gradients
from .nets import MlpConfig, apply_mlp, init_params, mlp_forward
from .params import ParameterSet
from .rng import make_rng, stream_seed
from .tape import Tape, Var, backward

__all__ = [
    "AdamState",
    "Checkpoint",
    "GradCheckResult",
    "MlpConfig",
    "ParameterSet",
    "Tape",
    "Var",
    "adam_step",
    "apply_mlp",
    "backward",
    "check_gradients",
    "init_params",
    "load_checkpoint",
    "make_rng",
    "mlp_forward",
    "save_checkpoint",
    "stream_seed",
]
