"""
Capas diferenciables escritas sobre numpy.

Todas las capas trabajan en NCHW (o NC para las densas) y siguen el mismo
contrato: `forward(x, entrenamiento)` guarda lo necesario y `backward(grad)`
acumula los gradientes de sus parámetros y devuelve el gradiente de la entrada.
"""
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from config.exceptions import EstadoInvalidoError, FormaInvalidaError, FueraDeRangoError

DTYPE = np.float32


class Capa:
    """Base: parámetros, gradientes y buffers (estadísticas no entrenables)."""

    def __init__(self):
        self.params = {}
        self.grads = {}
        self.buffers = {}
        self._cache = None

    def hojas(self):
        return [self]

    def forward(self, x, entrenamiento=False):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError

    def _recuperar(self):
        if self._cache is None:
            raise EstadoInvalidoError(f"{type(self).__name__}: backward sin forward previo.")
        return self._cache

    def _iniciar_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def zero_grad(self):
        for hoja in self.hojas():
            hoja._iniciar_grads()

    def parametros(self):
        """(nombre, valor, gradiente) en orden determinista."""
        resultado = []
        for k, hoja in enumerate(self.hojas()):
            for nombre in sorted(hoja.params):
                resultado.append((f"{k}.{type(hoja).__name__}.{nombre}", hoja.params[nombre], hoja.grads[nombre]))
        return resultado

    def estadisticas(self):
        resultado = []
        for k, hoja in enumerate(self.hojas()):
            for nombre in sorted(hoja.buffers):
                resultado.append((f"{k}.{type(hoja).__name__}.{nombre}", hoja.buffers[nombre]))
        return resultado

    def to_dtype(self, dtype):
        for hoja in self.hojas():
            hoja.params = {k: v.astype(dtype) for k, v in hoja.params.items()}
            hoja.buffers = {k: v.astype(dtype) for k, v in hoja.buffers.items()}
            hoja._iniciar_grads()
        return self

    def reseed(self, semilla):
        """Fija el generador de cada capa de dropout a partir de (semilla, posición)."""
        for k, hoja in enumerate(self.hojas()):
            if isinstance(hoja, Dropout):
                hoja.rng = np.random.default_rng([int(semilla), k])

    @property
    def dtype(self):
        for _, valor, _ in self.parametros():
            return valor.dtype
        return np.dtype(DTYPE)


class Conv2D(Capa):
    """Convolución 'same' con stride 1, núcleos rectangulares y grupos."""

    def __init__(self, entrada, salida, nucleo, grupos=1, rng=None):
        super().__init__()
        kh, kw = nucleo
        if entrada % grupos or salida % grupos:
            raise FueraDeRangoError("Los canales deben ser divisibles por el número de grupos.")
        self.entrada, self.salida, self.grupos = entrada, salida, grupos
        self.nucleo = (kh, kw)
        self.relleno = ((kh - 1) // 2, kh - 1 - (kh - 1) // 2, (kw - 1) // 2, kw - 1 - (kw - 1) // 2)
        rng = rng or np.random.default_rng(0)
        fan_in = (entrada // grupos) * kh * kw
        self.params = {
            'W': (rng.standard_normal((salida, entrada // grupos, kh, kw)) * math.sqrt(2.0 / fan_in)).astype(DTYPE),
            'b': np.zeros(salida, dtype=DTYPE),
        }
        self._iniciar_grads()

    def _grupos(self):
        ci, co = self.entrada // self.grupos, self.salida // self.grupos
        for g in range(self.grupos):
            yield slice(g * ci, (g + 1) * ci), slice(g * co, (g + 1) * co)

    def forward(self, x, entrenamiento=False):
        if x.ndim != 4 or x.shape[1] != self.entrada:
            raise FormaInvalidaError(f"Conv2D espera (B, {self.entrada}, H, W), recibió {x.shape}.")
        arriba, abajo, izq, der = self.relleno
        xp = np.pad(x, ((0, 0), (0, 0), (arriba, abajo), (izq, der)))
        ventanas = sliding_window_view(xp, self.nucleo, axis=(2, 3))
        W = self.params['W']
        salida = np.empty((x.shape[0], self.salida, x.shape[2], x.shape[3]), dtype=W.dtype)
        for cg, og in self._grupos():
            salida[:, og] = np.einsum('bchwij,ocij->bohw', ventanas[:, cg], W[og], optimize=True)
        salida += self.params['b'][None, :, None, None]
        self._cache = (x.shape, ventanas)
        return salida

    def backward(self, grad):
        forma, ventanas = self._recuperar()
        W = self.params['W']
        kh, kw = self.nucleo
        arriba, _, izq, _ = self.relleno
        H, Wd = forma[2], forma[3]
        dxp = np.zeros((forma[0], forma[1], H + kh - 1, Wd + kw - 1), dtype=grad.dtype)
        for cg, og in self._grupos():
            self.grads['W'][og] += np.einsum('bchwij,bohw->ocij', ventanas[:, cg], grad[:, og], optimize=True)
            for i in range(kh):
                for j in range(kw):
                    dxp[:, cg, i:i + H, j:j + Wd] += np.einsum('bohw,oc->bchw', grad[:, og], W[og][:, :, i, j])
        self.grads['b'] += grad.sum(axis=(0, 2, 3), dtype=np.float64).astype(grad.dtype)
        return dxp[:, :, arriba:arriba + H, izq:izq + Wd]


class Dense(Capa):
    def __init__(self, entrada, salida, rng=None):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.entrada, self.salida = entrada, salida
        self.params = {
            'W': (rng.standard_normal((entrada, salida)) * math.sqrt(2.0 / entrada)).astype(DTYPE),
            'b': np.zeros(salida, dtype=DTYPE),
        }
        self._iniciar_grads()

    def forward(self, x, entrenamiento=False):
        if x.ndim != 2 or x.shape[1] != self.entrada:
            raise FormaInvalidaError(f"Dense espera (B, {self.entrada}), recibió {x.shape}.")
        self._cache = x
        return x @ self.params['W'] + self.params['b']

    def backward(self, grad):
        x = self._recuperar()
        self.grads['W'] += x.T @ grad
        self.grads['b'] += grad.sum(axis=0, dtype=np.float64).astype(grad.dtype)
        return grad @ self.params['W'].T


class ReLU(Capa):
    def forward(self, x, entrenamiento=False):
        mascara = x > 0
        self._cache = mascara
        return x * mascara

    def backward(self, grad):
        return grad * self._recuperar()


class BatchNorm(Capa):
    """
    Normalización por lotes sobre el eje de canales (1).

    Varianza sesgada tanto en entrenamiento como en las estadísticas móviles.
    """

    def __init__(self, canales, momento=0.1, eps=1e-5):
        super().__init__()
        self.momento, self.eps = momento, eps
        self.params = {'gamma': np.ones(canales, dtype=DTYPE), 'beta': np.zeros(canales, dtype=DTYPE)}
        self.buffers = {'media': np.zeros(canales, dtype=DTYPE), 'varianza': np.ones(canales, dtype=DTYPE)}
        self._iniciar_grads()

    @staticmethod
    def _ejes(x):
        return (0,) if x.ndim == 2 else (0, 2, 3)

    @staticmethod
    def _forma(x):
        return (1, -1) if x.ndim == 2 else (1, -1, 1, 1)

    def forward(self, x, entrenamiento=False):
        ejes, forma = self._ejes(x), self._forma(x)
        gamma = self.params['gamma'].reshape(forma)
        beta = self.params['beta'].reshape(forma)
        if not entrenamiento:
            self._cache = None
            media = self.buffers['media'].reshape(forma)
            inv = 1.0 / np.sqrt(self.buffers['varianza'].reshape(forma) + self.eps)
            return ((x - media) * inv * gamma + beta).astype(x.dtype)

        media = x.mean(axis=ejes, dtype=np.float64)
        varianza = x.var(axis=ejes, dtype=np.float64)
        m = self.momento
        dtype = self.buffers['media'].dtype
        self.buffers['media'] = ((1 - m) * self.buffers['media'] + m * media).astype(dtype)
        self.buffers['varianza'] = ((1 - m) * self.buffers['varianza'] + m * varianza).astype(dtype)

        inv = (1.0 / np.sqrt(varianza + self.eps)).reshape(forma)
        xhat = (x - media.reshape(forma)) * inv
        self._cache = (xhat, inv, ejes, forma)
        return (xhat * gamma + beta).astype(x.dtype)

    def backward(self, grad):
        xhat, inv, ejes, forma = self._recuperar()
        n = grad.size // grad.shape[1]
        self.grads['gamma'] += (grad * xhat).sum(axis=ejes, dtype=np.float64).astype(grad.dtype)
        self.grads['beta'] += grad.sum(axis=ejes, dtype=np.float64).astype(grad.dtype)
        dxhat = grad * self.params['gamma'].reshape(forma)
        suma = dxhat.sum(axis=ejes, dtype=np.float64).reshape(forma)
        suma_x = (dxhat * xhat).sum(axis=ejes, dtype=np.float64).reshape(forma)
        dx = inv / n * (n * dxhat - suma - xhat * suma_x)
        return dx.astype(grad.dtype)


class MaxPool2D(Capa):
    """Ventana 2×2 con stride 1; relleno -inf abajo/derecha para conservar H×W."""

    def forward(self, x, entrenamiento=False):
        B, C, H, W = x.shape
        xp = np.pad(x, ((0, 0), (0, 0), (0, 1), (0, 1)), constant_values=-np.inf)
        ventanas = sliding_window_view(xp, (2, 2), axis=(2, 3)).reshape(B, C, H, W, 4)
        indices = ventanas.argmax(axis=-1)
        self._cache = (x.shape, indices)
        return np.take_along_axis(ventanas, indices[..., None], axis=-1)[..., 0]

    def backward(self, grad):
        (B, C, H, W), indices = self._recuperar()
        dxp = np.zeros((B, C, H + 1, W + 1), dtype=grad.dtype)
        for k in range(4):
            i, j = divmod(k, 2)
            dxp[:, :, i:i + H, j:j + W] += grad * (indices == k)
        return dxp[:, :, :H, :W]


class Dropout(Capa):
    """Dropout invertido; identidad en inferencia o con p = 0."""

    def __init__(self, p=0.3):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise FueraDeRangoError("La probabilidad de dropout debe estar en [0, 1).")
        self.p = p
        self.rng = np.random.default_rng(0)

    def forward(self, x, entrenamiento=False):
        if not entrenamiento or self.p == 0.0:
            self._cache = None
            return x
        mascara = (self.rng.random(x.shape) >= self.p).astype(x.dtype) / (1.0 - self.p)
        self._cache = mascara
        return x * mascara

    def backward(self, grad):
        return grad if self._cache is None else grad * self._cache


class Flatten(Capa):
    def forward(self, x, entrenamiento=False):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        return grad.reshape(self._recuperar())


class Secuencial(Capa):
    def __init__(self, capas):
        super().__init__()
        self.capas = list(capas)

    def hojas(self):
        return [h for capa in self.capas for h in capa.hojas()]

    def forward(self, x, entrenamiento=False):
        for capa in self.capas:
            x = capa.forward(x, entrenamiento)
        return x

    def backward(self, grad):
        for capa in reversed(self.capas):
            grad = capa.backward(grad)
        return grad


class Ramas(Capa):
    """Ramas paralelas sobre la misma entrada, concatenadas en el eje de canales."""

    def __init__(self, ramas):
        super().__init__()
        self.ramas = list(ramas)

    def hojas(self):
        return [h for rama in self.ramas for h in rama.hojas()]

    def forward(self, x, entrenamiento=False):
        salidas = [rama.forward(x, entrenamiento) for rama in self.ramas]
        self._cache = np.cumsum([s.shape[1] for s in salidas])[:-1]
        return np.concatenate(salidas, axis=1)

    def backward(self, grad):
        cortes = self._recuperar()
        partes = np.split(grad, cortes, axis=1)
        return sum(rama.backward(g) for rama, g in zip(self.ramas, partes))


class Residual(Capa):
    """x + f(x), sin activación tras la suma."""

    def __init__(self, interior):
        super().__init__()
        self.interior = interior

    def hojas(self):
        return self.interior.hojas()

    def forward(self, x, entrenamiento=False):
        y = self.interior.forward(x, entrenamiento)
        if y.shape != x.shape:
            raise FormaInvalidaError("La rama residual debe conservar la forma de la entrada.")
        return x + y

    def backward(self, grad):
        return grad + self.interior.backward(grad)
