import numpy as np


class Adam:
    """Adam con corrección de sesgo; los momentos se guardan en el orden de `red.parametros()`."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = []
        self.v = []

    def step(self, parametros):
        if not self.m:
            self.m = [np.zeros_like(valor) for _, valor, _ in parametros]
            self.v = [np.zeros_like(valor) for _, valor, _ in parametros]
        self.t += 1
        correccion1 = 1.0 - self.beta1 ** self.t
        correccion2 = 1.0 - self.beta2 ** self.t
        for k, (_, valor, grad) in enumerate(parametros):
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad * grad
            paso = self.lr * (self.m[k] / correccion1) / (np.sqrt(self.v[k] / correccion2) + self.eps)
            valor -= paso.astype(valor.dtype)

    def estado(self):
        return {'lr': self.lr, 'beta1': self.beta1, 'beta2': self.beta2, 'eps': self.eps, 't': self.t}
