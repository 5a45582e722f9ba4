"""
Criterios de información AIC y MDL para estimar el número de señales.

L(d) mide cuán parecidos son los E-d autovalores más pequeños:
L(d) = -N·(E-d)·log(media geométrica / media aritmética).
"""
import logging
from dataclasses import dataclass

import numpy as np

from config.exceptions import FueraDeRangoError
from .eigen import hermitian_eigen

logger = logging.getLogger(__name__)

PISO_AUTOVALOR = 1e-300


@dataclass(frozen=True)
class EstimacionOrden:
    orden: int
    scores: np.ndarray
    # Algún autovalor de ruido no positivo se recortó a PISO_AUTOVALOR.
    recortada: bool = False


def _cercania(valores, d, N):
    """L(d) y si hubo que recortar autovalores de ruido no positivos."""
    E = valores.size
    if not 0 <= d < E:
        raise FueraDeRangoError(f"d debe estar en 0..{E - 1}, no {d}.")
    if N < 2:
        raise FueraDeRangoError("N debe ser >= 2.")

    ruido = valores[d:]
    recortada = bool(np.any(ruido <= 0))
    if recortada:
        ruido = np.maximum(ruido, PISO_AUTOVALOR)

    media_aritmetica = np.mean(ruido)
    log_media_geometrica = np.mean(np.log(ruido))
    valor = -N * (E - d) * (log_media_geometrica - np.log(media_aritmetica))
    return max(0.0, float(valor)), recortada


def _ordenar(eigenvalues):
    return np.sort(np.asarray(eigenvalues, dtype=float))[::-1]


def closeness_statistic(eigenvalues, d, N):
    valor, recortada = _cercania(_ordenar(eigenvalues), d, N)
    if recortada:
        logger.warning("Autovalores de ruido no positivos (d=%d); se recortan a %g.", d, PISO_AUTOVALOR)
    return valor


def _penalizacion(d, E, N, criterio):
    libres = d * (2 * E - d)
    if criterio == 'aic':
        return float(libres)
    if criterio == 'mdl':
        return 0.5 * libres * np.log(N)
    raise FueraDeRangoError(f"Criterio desconocido: {criterio}")


def _puntajes(eigenvalues, N, criterio):
    valores = _ordenar(eigenvalues)
    E = valores.size
    scores, recortada = np.empty(E), False
    for d in range(E):
        valor, recorte = _cercania(valores, d, N)
        scores[d] = valor + _penalizacion(d, E, N, criterio)
        recortada = recortada or recorte
    return scores, recortada


def criterion_scores(eigenvalues, N, criterio):
    """Puntaje L(d) + penalización para d = 0..E-1."""
    return _puntajes(eigenvalues, N, criterio)[0]


def estimar_orden(cov, N, criterio):
    """Como `aic_estimate`/`mdl_estimate`, pero conserva los puntajes y el aviso de recorte."""
    scores, recortada = _puntajes(hermitian_eigen(cov).eigenvalues, N, criterio)
    if recortada:
        logger.warning("Autovalores de ruido no positivos recortados a %g (%s).", PISO_AUTOVALOR, criterio)
    return EstimacionOrden(orden=int(np.argmin(scores)), scores=scores, recortada=recortada)


def aic_estimate(cov, N):
    return estimar_orden(cov, N, 'aic').orden


def mdl_estimate(cov, N):
    return estimar_orden(cov, N, 'mdl').orden
