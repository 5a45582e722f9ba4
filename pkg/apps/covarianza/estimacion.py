"""Estimación de covarianza, características real/imaginaria y suavizado temporal."""
from dataclasses import dataclass

import numpy as np

from config.exceptions import BloquesInsuficientesError, EntradaInvalidaError, FueraDeRangoError


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray
    snapshot_count: int
    smoothed_over: int = 1

    @property
    def dimension(self):
        return self.entries.shape[0]

    def es_hermitica(self, tolerancia=1e-10):
        escala = max(np.linalg.norm(self.entries), 1e-300)
        return np.linalg.norm(self.entries - self.entries.conj().T) <= tolerancia * escala


def estimate_covariance(snapshot):
    """R = X·Xᴴ / N con X orientada E×N."""
    x = getattr(snapshot, 'samples', snapshot)
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[1] < 1:
        raise EntradaInvalidaError("El bloque debe ser una matriz E×N con N >= 1.")
    if not np.all(np.isfinite(x)):
        raise EntradaInvalidaError("El bloque contiene muestras no finitas.")
    n = x.shape[1]
    r = x @ x.conj().T / n
    r = 0.5 * (r + r.conj().T)
    return CovarianceMatrix(entries=r, snapshot_count=n)


def to_feature(cov):
    """Tensor E×E×2: canal 0 parte real, canal 1 parte imaginaria."""
    return np.stack([cov.entries.real, cov.entries.imag], axis=-1)


def from_feature(feature, snapshot_count=1):
    feature = np.asarray(feature, dtype=float)
    if feature.ndim != 3 or feature.shape[-1] != 2 or feature.shape[0] != feature.shape[1]:
        raise EntradaInvalidaError("Se esperaba un tensor E×E×2.")
    return CovarianceMatrix(entries=feature[..., 0] + 1j * feature[..., 1], snapshot_count=snapshot_count)


def temporal_smooth(block_covariances, B):
    """
    Promedia las covarianzas de los bloques impares 1, 3, ..., 2B-1.

    Los bloques consecutivos pueden estar dentro del tiempo de coherencia;
    saltando uno se garantiza independencia de las ganancias.
    """
    if B < 1:
        raise FueraDeRangoError("B debe ser >= 1.")
    covs = list(block_covariances)
    requeridos = 2 * B - 1
    if len(covs) < requeridos:
        raise BloquesInsuficientesError(requeridos, len(covs))
    seleccion = covs[0:requeridos:2]
    entries = sum(c.entries for c in seleccion) / B
    return CovarianceMatrix(
        entries=0.5 * (entries + entries.conj().T),
        snapshot_count=seleccion[0].snapshot_count,
        smoothed_over=B,
    )
