"""Minimal tensor layers, recurrent kernels, and the six architectures."""
from .models import (ForwardTrace, ModelSpec, TraceReuseError, grad_check,
                     init_params, model_backward, model_forward, param_shapes)

__all__ = [
    "ForwardTrace", "ModelSpec", "TraceReuseError", "grad_check",
    "init_params", "model_backward", "model_forward", "param_shapes",
]
