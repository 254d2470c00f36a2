"""Dense linear algebra, activations and seeded randomness."""

from addgate.tensor.core import (
    ActivationKind,
    Matrix,
    Rng,
    ShapeError,
    Vector,
    activation_grad,
    apply_activation,
    as_matrix,
    as_vector,
    matvec,
    relu,
    relu_pos_neg,
    sigmoid,
    sigmoid_scalar,
    softmax,
    softmax_backward,
)

__all__ = [
    "ActivationKind",
    "Matrix",
    "Rng",
    "ShapeError",
    "Vector",
    "activation_grad",
    "apply_activation",
    "as_matrix",
    "as_vector",
    "matvec",
    "relu",
    "relu_pos_neg",
    "sigmoid",
    "sigmoid_scalar",
    "softmax",
    "softmax_backward",
]
