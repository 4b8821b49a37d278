"""Adam with bias-corrected first/second moments."""

import numpy as np

from ..errors import DivergenceError, ShapeError


class Adam:
    def __init__(self, learning_rate, beta1=0.9, beta2=0.999, eps=1e-7):
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        """Update params in place from matching nested grad dicts."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        correction1 = 1.0 - b1**self.t
        correction2 = 1.0 - b2**self.t
        for lname, group in grads.items():
            for pname, g in group.items():
                p = params[lname][pname]
                if g.shape != p.shape:
                    raise ShapeError(f"{lname}/{pname}: grad {g.shape} vs param {p.shape}")
                if not np.all(np.isfinite(g)):
                    raise DivergenceError(f"non-finite gradient in {lname}/{pname}")
                key = (lname, pname)
                if key not in self.m:
                    self.m[key] = np.zeros_like(p)
                    self.v[key] = np.zeros_like(p)
                m = self.m[key]
                v = self.v[key]
                m *= b1
                m += (1.0 - b1) * g
                v *= b2
                v += (1.0 - b2) * g * g
                m_hat = m / correction1
                v_hat = v / correction2
                p -= (self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)).astype(
                    p.dtype
                )
