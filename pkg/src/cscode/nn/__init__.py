"""Minimal neural-network engine: dense and 1-D conv layers, MSE, Adam."""

from .gradcheck import GradCheckResult, gradient_check
from .layers import Conv1D, Dense, Flatten
from .model import ArchitectureSpec, CheckpointError, NeuralModel, build, parameter_count
from .optim import Adam

__all__ = [
    "Adam",
    "ArchitectureSpec",
    "CheckpointError",
    "Conv1D",
    "Dense",
    "Flatten",
    "GradCheckResult",
    "NeuralModel",
    "build",
    "gradient_check",
    "parameter_count",
]
