"""Adam optimizer over flat parameter views.

:func:`adam_step` is pure: it returns new parameter arrays and a new
:class:`AdamState` and never mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from addgate.tensor import ShapeError


@dataclass(frozen=True)
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lr < 0:
            raise ValueError(f"learning rate must be >= 0, got {self.lr}")
        for name, beta in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0.0 <= beta < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {beta}")


def adam_step(
    state: AdamState,
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns ``(new_params, new_state)``."""
    if params.keys() != grads.keys():
        raise ShapeError(
            f"parameter/gradient names differ: {sorted(params.keys() ^ grads.keys())}"
        )
    t = state.step_count + 1
    correct1 = 1.0 - state.beta1**t
    correct2 = 1.0 - state.beta2**t
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient {name} has shape {g.shape}, parameter {p.shape}")
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / correct1
        v_hat = v / correct2
        new_params[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
        new_m[name] = m
        new_v[name] = v
    new_state = AdamState(
        state.lr, state.beta1, state.beta2, state.epsilon, t, new_m, new_v
    )
    return new_params, new_state
