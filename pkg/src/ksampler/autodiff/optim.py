"""Adam and RMSprop parameter updates.

Both keep one state slot per registered parameter and zero gradients
after a step. A step with any missing gradient is a validation error.
"""

import numpy as np

from ..errors import ValidationError


class Adam:
    """Bias-corrected first/second moment update."""

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.t += 1
        for i, p in enumerate(self.params):
            if p.grad is None:
                raise ValidationError("Adam.step: parameter has no gradient")
            g = p.grad
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1**self.t)
            vhat = self.v[i] / (1 - self.beta2**self.t)
            p.data = p.data - self.lr * mhat / (np.sqrt(vhat) + self.eps)
            p.grad = None

    def zero_grad(self):
        for p in self.params:
            p.grad = None


class RMSprop:
    """EMA of squared gradients; decay 0.99 by default."""

    def __init__(self, params, lr=1e-4, decay=0.99, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        for i, p in enumerate(self.params):
            if p.grad is None:
                raise ValidationError("RMSprop.step: parameter has no gradient")
            g = p.grad
            self.v[i] = self.decay * self.v[i] + (1 - self.decay) * g * g
            p.data = p.data - self.lr * g / (np.sqrt(self.v[i]) + self.eps)
            p.grad = None

    def zero_grad(self):
        for p in self.params:
            p.grad = None
