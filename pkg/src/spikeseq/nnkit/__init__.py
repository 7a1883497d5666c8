"""Minimal deterministic tensor kit with reverse-mode gradients.

Just enough machinery to train the copy-task transformer: float64
tensors, a handful of differentiable primitives, an adaptive-moment
optimizer, and central-finite-difference gradient checking. Smallness is
a feature; there is no broadcasting beyond what the model needs.
"""

from .gradcheck import grad_check
from .optim import Adam
from .tensor import (
    Tensor,
    add,
    cross_entropy_bits,
    embedding_lookup,
    gelu,
    layer_norm,
    matmul,
    mul,
    relu,
    reshape,
    softmax_rows,
    transpose,
)

__all__ = [
    "Tensor",
    "add",
    "mul",
    "matmul",
    "relu",
    "gelu",
    "softmax_rows",
    "layer_norm",
    "embedding_lookup",
    "cross_entropy_bits",
    "reshape",
    "transpose",
    "Adam",
    "grad_check",
]
