"""Redes de clasificación de orden de modelo: RCNN residual y MLP de referencia."""
import logging

import numpy as np

from config.exceptions import EstadoInvalidoError, FormaInvalidaError, FueraDeRangoError
from .capas import BatchNorm, Conv2D, Dense, Dropout, Flatten, MaxPool2D, Ramas, ReLU, Residual, Secuencial

logger = logging.getLogger(__name__)

ELEMENTOS_SOPORTADOS = (6, 12)
CLASES_SOPORTADAS = (18, 19)
OCULTAS_MLP = (256, 1024, 512, 256, 128, 64)


class Red:
    """
    Red con entrada (B, E, E, 2) y salida de logits (B, num_classes).

    `descriptor` guarda la arquitectura y sus argumentos para poder
    reconstruirla desde un checkpoint.
    """

    def __init__(self, cuerpo, arquitectura, kwargs, num_classes, E):
        self.cuerpo = cuerpo
        self.arquitectura = arquitectura
        self.kwargs = dict(kwargs)
        self.num_classes = num_classes
        self.E = E
        self._pendiente = False

    @property
    def descriptor(self):
        return {'arquitectura': self.arquitectura, 'kwargs': self.kwargs}

    def forward(self, lote, entrenamiento=False):
        lote = np.asarray(lote)
        if lote.ndim == 3:
            lote = lote[None]
        if lote.ndim != 4 or lote.shape[1:] != (self.E, self.E, 2):
            raise FormaInvalidaError(f"Se esperaba un lote (B, {self.E}, {self.E}, 2), no {lote.shape}.")
        x = np.transpose(lote, (0, 3, 1, 2)).astype(self.cuerpo.dtype)
        salida = self.cuerpo.forward(x, entrenamiento)
        self._pendiente = True
        return salida

    def backward(self, grad):
        """Rellena los gradientes de todos los parámetros; devuelve el gradiente de la entrada."""
        if not self._pendiente:
            raise EstadoInvalidoError("backward requiere un forward previo.")
        self.cuerpo.zero_grad()
        dx = self.cuerpo.backward(np.asarray(grad, dtype=self.cuerpo.dtype))
        return np.transpose(dx, (0, 2, 3, 1))

    def parametros(self):
        return self.cuerpo.parametros()

    def estadisticas(self):
        return self.cuerpo.estadisticas()

    def count_parameters(self):
        return int(sum(valor.size for _, valor, _ in self.parametros()))

    def reseed(self, semilla):
        self.cuerpo.reseed(semilla)

    def to_dtype(self, dtype):
        self.cuerpo.to_dtype(dtype)
        return self

    def hojas(self):
        return self.cuerpo.hojas()


def _rama(entrada, canales, nucleo, dropout, rng):
    return Secuencial([
        Conv2D(entrada, canales, nucleo, rng=rng),
        ReLU(),
        BatchNorm(canales),
        MaxPool2D(),
        Dropout(dropout),
    ])


def build_rcnn(num_classes, E, canales=8, ocultas=128, dropout=0.3, semilla=0):
    """
    RCNN con ramas asimétricas 1×3 / 3×1, enlace residual 3×3 y
    convoluciones agrupadas antes de la cabeza densa.
    """
    if num_classes not in CLASES_SOPORTADAS:
        raise FueraDeRangoError(f"num_classes debe ser 18 o 19, no {num_classes}.")
    if E not in ELEMENTOS_SOPORTADOS:
        raise FueraDeRangoError(f"E no soportado: {E}. Valores válidos: {ELEMENTOS_SOPORTADOS}.")
    rng = np.random.default_rng(semilla)
    fusion = 2 * canales
    cuerpo = Secuencial([
        Ramas([
            _rama(2, canales, (1, 3), dropout, rng),
            _rama(2, canales, (3, 1), dropout, rng),
        ]),
        Residual(Conv2D(fusion, fusion, (3, 3), rng=rng)),
        Conv2D(fusion, fusion, (1, 3), grupos=2, rng=rng),
        ReLU(),
        Conv2D(fusion, fusion, (3, 1), grupos=2, rng=rng),
        ReLU(),
        Flatten(),
        Dense(fusion * E * E, ocultas, rng=rng),
        ReLU(),
        Dropout(dropout),
        Dense(ocultas, num_classes, rng=rng),
    ])
    kwargs = {'canales': canales, 'ocultas': ocultas, 'dropout': dropout, 'semilla': semilla}
    red = Red(cuerpo, 'rcnn', kwargs, num_classes, E)
    logger.debug("RCNN construida: E=%d, clases=%d, parámetros=%d", E, num_classes, red.count_parameters())
    return red


def build_mlp(num_classes, E, ocultas=OCULTAS_MLP, dropout=0.3, semilla=0):
    rng = np.random.default_rng(semilla)
    capas = [Flatten()]
    entrada = 2 * E * E
    for salida in ocultas:
        capas += [Dense(entrada, salida, rng=rng), BatchNorm(salida), ReLU(), Dropout(dropout)]
        entrada = salida
    capas.append(Dense(entrada, num_classes, rng=rng))
    kwargs = {'ocultas': list(ocultas), 'dropout': dropout, 'semilla': semilla}
    return Red(Secuencial(capas), 'mlp', kwargs, num_classes, E)


CONSTRUCTORES = {'rcnn': build_rcnn, 'mlp': build_mlp}


def construir(arquitectura, num_classes, E, **kwargs):
    try:
        constructor = CONSTRUCTORES[arquitectura]
    except KeyError:
        raise FueraDeRangoError(f"Arquitectura desconocida: {arquitectura}") from None
    return constructor(num_classes, E, **kwargs)


def softmax(logits):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict(red, caracteristicas):
    """Clases (1-based) y probabilidades; los empates van a la clase menor."""
    probabilidades = softmax(red.forward(caracteristicas, entrenamiento=False))
    return np.argmax(probabilidades, axis=-1) + 1, probabilidades
