"""
MUSIC 2-D sobre una grilla elevación × azimut.

P(θ, φ) = 1 / max(‖E_nᴴ a(θ, φ)‖², 1e-12). Los picos son máximos locales en
la vecindad de 8 celdas (el azimut se envuelve, la elevación no) refinados
con una parábola en escala logarítmica sobre cada eje.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from apps.arreglos.geometria import DirectionPair, steer_many
from apps.orden.eigen import hermitian_eigen
from config.exceptions import ArchivoError, FueraDeRangoError, OrdenExcesivoError

logger = logging.getLogger(__name__)

PISO_DENOMINADOR = 1e-12
RAZON_PICO_BAJO = 0.1


@dataclass(frozen=True)
class GridSpec:
    """Pasos de la grilla en grados."""
    elevation_step: float = 1.0
    azimuth_step: float = 1.0

    def __post_init__(self):
        if not (0 < self.elevation_step <= 90 and 0 < self.azimuth_step <= 180):
            raise FueraDeRangoError("Pasos de grilla fuera de rango.")

    @property
    def n_elevacion(self):
        return int(round(180.0 / self.elevation_step))

    @property
    def n_azimut(self):
        return int(round(360.0 / self.azimuth_step))


@dataclass(frozen=True)
class SpectrumGrid:
    """Valores sobre la grilla; la celda (i, j) es elevación i·paso_elevacion, azimut j·paso_azimut."""
    paso_elevacion: float
    paso_azimut: float
    valores: np.ndarray


@dataclass(frozen=True)
class Pico:
    direction: DirectionPair
    score: float
    celda: tuple
    bajo: bool = False


@dataclass(frozen=True)
class DoaEstimate:
    picos: tuple
    corta: bool

    @property
    def direcciones(self):
        return [p.direction for p in self.picos]


def noise_subspace(cov, n_M):
    """Autovectores de los E − n_M autovalores más pequeños."""
    descomposicion = hermitian_eigen(cov)
    E = descomposicion.eigenvalues.size
    if n_M >= E:
        raise OrdenExcesivoError(f"n_M={n_M} no deja subespacio de ruido con E={E}.")
    if n_M < 1:
        raise FueraDeRangoError("n_M debe ser >= 1.")
    return descomposicion.eigenvectors[:, n_M:]


def music_spectrum(cov, n_M, geom, grid=None):
    grid = grid or GridSpec()
    ruido = noise_subspace(cov, n_M)
    paso_el = math.pi / grid.n_elevacion
    paso_az = 2.0 * math.pi / grid.n_azimut
    elev = np.arange(grid.n_elevacion) * paso_el
    azim = np.arange(grid.n_azimut) * paso_az
    a = steer_many(geom, elev[:, None], azim[None, :])
    proyeccion = np.einsum('ek,ije->ijk', ruido.conj(), a, optimize=True)
    denominador = np.sum(np.abs(proyeccion) ** 2, axis=-1)
    valores = 1.0 / np.maximum(denominador, PISO_DENOMINADOR)
    return SpectrumGrid(paso_elevacion=paso_el, paso_azimut=paso_az, valores=valores)


def _maximos_locales(valores):
    filtrado = ndimage.maximum_filter(valores, size=3, mode=('constant', 'wrap'), cval=-np.inf)
    filas, columnas = np.nonzero(valores >= filtrado)
    celdas = list(zip(filas.tolist(), columnas.tolist()))
    # En el polo todas las columnas son la misma dirección.
    if np.ptp(valores[0]) <= 1e-12 * np.max(valores[0]):
        celdas = [c for c in celdas if c[0] != 0 or c[1] == 0]
    return celdas


def _adyacentes(a, b, n_az):
    dj = abs(a[1] - b[1])
    return abs(a[0] - b[0]) <= 1 and min(dj, n_az - dj) <= 1


def _desplazamiento(menos, centro, mas):
    curvatura = menos - 2.0 * centro + mas
    if curvatura >= 0:
        return 0.0
    return float(np.clip(0.5 * (menos - mas) / curvatura, -0.5, 0.5))


def _refinar(espectro, i, j):
    log_p = np.log(espectro.valores)
    n_el, n_az = log_p.shape
    dj = _desplazamiento(log_p[i, (j - 1) % n_az], log_p[i, j], log_p[i, (j + 1) % n_az])
    di = 0.0
    if 0 < i < n_el - 1:
        di = _desplazamiento(log_p[i - 1, j], log_p[i, j], log_p[i + 1, j])
    return DirectionPair.normalizada((j + dj) * espectro.paso_azimut, (i + di) * espectro.paso_elevacion)


def picos_espectro(espectro, n_M, hemisferio_superior=False):
    """Los n_M picos más altos; con `hemisferio_superior` solo se buscan en elevación ≤ π/2."""
    valores = espectro.valores
    if hemisferio_superior:
        ultima = int(math.floor((math.pi / 2) / espectro.paso_elevacion + 1e-9))
        valores = valores[:ultima + 1]
    n_az = valores.shape[1]

    candidatos = sorted(_maximos_locales(valores), key=lambda c: -valores[c])
    elegidos = []
    for celda in candidatos:
        if any(_adyacentes(celda, otro, n_az) for otro in elegidos):
            continue
        elegidos.append(celda)
        if len(elegidos) == n_M:
            break

    if not elegidos:
        return DoaEstimate(picos=(), corta=True)
    mejor = valores[elegidos[0]]
    picos = tuple(
        Pico(
            direction=_refinar(espectro, i, j),
            score=float(valores[i, j]),
            celda=(i, j),
            bajo=bool(valores[i, j] < RAZON_PICO_BAJO * mejor),
        )
        for i, j in elegidos
    )
    corta = len(picos) < n_M
    if corta:
        logger.warning("Solo se hallaron %d de %d picos en el espectro.", len(picos), n_M)
    return DoaEstimate(picos=picos, corta=corta)


def estimate_doas(cov, n_M, geom, grid=None):
    espectro = music_spectrum(cov, n_M, geom, grid)
    return picos_espectro(espectro, n_M, hemisferio_superior=geom.simetria_especular)


def exportar_espectro(espectro, path):
    """Volcado de texto: cabecera con los ejes en grados y una fila por elevación."""
    n_el, n_az = espectro.valores.shape
    cabecera = (
        f"elevation_deg start=0 step={math.degrees(espectro.paso_elevacion):.6g} count={n_el}\n"
        f"azimuth_deg start=0 step={math.degrees(espectro.paso_azimut):.6g} count={n_az}"
    )
    try:
        np.savetxt(path, espectro.valores, fmt='%.6e', header=cabecera)
    except OSError as e:
        raise ArchivoError(f"No se pudo escribir el espectro '{path}': {e}") from e
