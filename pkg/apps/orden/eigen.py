"""Descomposición espectral hermítica."""
import math
from dataclasses import dataclass

import numpy as np

from config.exceptions import EntradaInvalidaError


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruir(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _matriz(cov):
    return np.asarray(getattr(cov, 'entries', cov))


def hermitian_eigen(cov, tolerancia=1e-10):
    """Autovalores reales en orden descendente y autovectores ortonormales."""
    r = _matriz(cov)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise EntradaInvalidaError("Se esperaba una matriz cuadrada.")
    if not np.all(np.isfinite(r)):
        raise EntradaInvalidaError("La matriz contiene valores no finitos.")
    escala = max(np.linalg.norm(r), 1e-300)
    if np.linalg.norm(r - r.conj().T) > tolerancia * escala:
        raise EntradaInvalidaError("La matriz no es hermítica dentro de la tolerancia.")
    valores, vectores = np.linalg.eigh(0.5 * (r + r.conj().T))
    return EigenDecomposition(eigenvalues=valores[::-1].copy(), eigenvectors=vectores[:, ::-1].copy())


def jacobi_eigenvalues(matriz, tolerancia=1e-13, max_barridos=60):
    """
    Autovalores (descendentes) por rotaciones de Jacobi cíclicas.

    Trabaja sobre el embebido real 2E×2E [[Re, -Im], [Im, Re]], cuyo espectro
    repite cada autovalor hermítico dos veces.
    """
    h = np.asarray(matriz, dtype=complex)
    a = np.block([[h.real, -h.imag], [h.imag, h.real]])
    n = a.shape[0]
    for _ in range(max_barridos):
        fuera = math.sqrt(np.sum(np.tril(a, -1) ** 2))
        if fuera <= tolerancia * max(np.linalg.norm(a), 1e-300):
            break
        for k in range(n - 1):
            for l in range(k + 1, n):
                if a[k, l] == 0.0:
                    continue
                phi = (a[l, l] - a[k, k]) / (2.0 * a[k, l])
                t = 1.0 / (abs(phi) + math.sqrt(phi * phi + 1.0))
                if phi < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                fila_k, fila_l = a[k, :].copy(), a[l, :].copy()
                a[k, :] = c * fila_k - s * fila_l
                a[l, :] = s * fila_k + c * fila_l
                col_k, col_l = a[:, k].copy(), a[:, l].copy()
                a[:, k] = c * col_k - s * col_l
                a[:, l] = s * col_k + c * col_l
    valores = np.sort(np.diagonal(a))[::-1]
    return valores[::2].copy()
