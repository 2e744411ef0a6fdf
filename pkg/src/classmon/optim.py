"""Adam optimizer with bias-corrected moment estimates."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch


@dataclass
class AdamConfig:
    """Training hyperparameters; defaults follow the standard Adam recipe."""

    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 10
    batch_size: int = 32

    def validate(self) -> "AdamConfig":
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("beta coefficients must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be at least 1")
        return self


class AdamOptimizer:
    """Holds first/second moment state and applies update steps in place.

    update = lr * m_hat / (sqrt(v_hat) + epsilon), with m_hat and v_hat the
    bias-corrected moving averages of the gradient and squared gradient.
    """

    def __init__(self, config: AdamConfig | None = None):
        self.config = (config or AdamConfig()).validate()
        self.t = 0
        self._m: dict = {}
        self._v: dict = {}

    def step(self, params: dict, grads: dict) -> dict:
        cfg = self.config
        self.t += 1
        for name, p in params.items():
            g = grads[name]
            if g.shape != p.shape:
                raise ShapeMismatch(
                    f"gradient shape {g.shape} does not match parameter {name} {p.shape}"
                )
            if name not in self._m:
                self._m[name] = np.zeros_like(p)
                self._v[name] = np.zeros_like(p)
            m = self._m[name]
            v = self._v[name]
            m *= cfg.beta1
            m += (1 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1 - cfg.beta2) * g * g
            m_hat = m / (1 - cfg.beta1**self.t)
            v_hat = v / (1 - cfg.beta2**self.t)
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        return params
