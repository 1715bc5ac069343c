"""
Losses, the trajectory buffer, the training loop and checkpoints.
"""
from src.training.buffer import TrajectoryBuffer
from src.training.losses import (
    LossBreakdown,
    diversity_regularizer,
    entropy_regularizer,
    nce_loss,
    prediction_loss,
    slot_usage_frequencies,
)
from src.training.trainer import compute_losses, temperature_at, train, train_step
from src.utils.checkpoint import load_checkpoint, save_checkpoint
