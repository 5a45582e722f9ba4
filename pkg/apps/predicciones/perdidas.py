"""
Entropía cruzada estándar y ponderada por el error de orden.

La ponderada multiplica la CE de cada muestra por ½(w1 + w2), con
w1 = exp(K1·(n_M − n̂_M)) y w2 = exp(K2·(n_P − n̂_P)); n̂ sale del argmax
de los mismos logits y se trata como constante en el gradiente.
"""
from dataclasses import dataclass

import numpy as np

from apps.canal.etiquetas import CLASE_SOBRECARGADA, TABLA_ETIQUETAS
from config.exceptions import FueraDeRangoError
from .red import softmax

ESTANDAR = 'standard_ce'
PONDERADA = 'weighted_ce'


@dataclass(frozen=True)
class LossSpec:
    kind: str = PONDERADA
    k1: float = 1.5
    k2: float = 4.0

    def __post_init__(self):
        if self.kind not in (ESTANDAR, PONDERADA):
            raise FueraDeRangoError(f"Pérdida desconocida: {self.kind}")
        if not self.k2 > self.k1 > 1.0:
            raise FueraDeRangoError(f"Se requiere K2 > K1 > 1 (K1={self.k1}, K2={self.k2}).")


def _entropia(logits, clases):
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 1:
        logits = logits[None]
    clases = np.atleast_1d(np.asarray(clases, dtype=np.int64))
    C = logits.shape[1]
    if clases.shape[0] != logits.shape[0]:
        raise FueraDeRangoError("Hay distinto número de logits y etiquetas.")
    if np.any(clases < 1) or np.any(clases > C):
        raise FueraDeRangoError(f"Etiquetas fuera de 1..{C}.")

    z = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(z).sum(axis=1))
    filas = np.arange(len(clases))
    ce = log_z - z[filas, clases - 1]
    gradiente = softmax(logits)
    gradiente[filas, clases - 1] -= 1.0
    return ce, gradiente, logits


def loss_standard_ce(logits, clases):
    """Media de −log softmax(logits)[clase] y su gradiente respecto a los logits."""
    ce, gradiente, _ = _entropia(logits, clases)
    n = len(ce)
    return float(ce.mean()), gradiente / n


def pesos_orden(clases_reales, clases_estimadas, config_perdida):
    """½(w1 + w2) por muestra; 1 cuando alguna de las dos clases es la sobrecargada."""
    pesos = np.ones(len(clases_reales))
    for k, (real, estimada) in enumerate(zip(clases_reales, clases_estimadas)):
        if CLASE_SOBRECARGADA in (real, estimada):
            continue
        _, n_M, n_P = TABLA_ETIQUETAS[int(real)][:3]
        _, m_M, m_P = TABLA_ETIQUETAS[int(estimada)][:3]
        pesos[k] = 0.5 * (np.exp(config_perdida.k1 * (n_M - m_M)) + np.exp(config_perdida.k2 * (n_P - m_P)))
    return pesos


def loss_weighted_ce(logits, clases, config_perdida):
    ce, gradiente, logits = _entropia(logits, clases)
    estimadas = np.argmax(logits, axis=1) + 1
    pesos = pesos_orden(np.atleast_1d(clases), estimadas, config_perdida)
    n = len(ce)
    return float(np.mean(pesos * ce)), gradiente * pesos[:, None] / n


def perdida(logits, clases, config_perdida):
    if config_perdida.kind == ESTANDAR:
        return loss_standard_ce(logits, clases)
    return loss_weighted_ce(logits, clases, config_perdida)
