"""init file for models module."""
from app.models.networks import (
    AdamState,
    Head,
    MlpNet,
    adam_step,
    hard_copy,
    load_checkpoint,
    save_checkpoint,
    soft_update,
)
from app.models.replay import Batch, ReplayBuffer, Transition


__all__ = [
    "AdamState",
    "Head",
    "MlpNet",
    "adam_step",
    "hard_copy",
    "load_checkpoint",
    "save_checkpoint",
    "soft_update",
    "Batch",
    "ReplayBuffer",
    "Transition",
]
