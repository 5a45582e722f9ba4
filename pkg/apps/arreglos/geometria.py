"""
Geometrías de arreglo (URA, UCA, sensor vectorial) y vectores de dirección.

Convención de ángulos: `elevation` es el ángulo polar desde el cenit en
[0, π) y multiplica por sinθ en los exponentes; `azimuth` es el ángulo en el
plano en [0, 2π).
"""
import math
from dataclasses import dataclass

import numpy as np
from django.db import models

from config.exceptions import EntradaVaciaError, FueraDeRangoError, GeometriaInvalidaError

VELOCIDAD_LUZ = 299792458.0
FRECUENCIA_PORTADORA = 2.7e9
DOS_PI = 2.0 * math.pi


class TipoArreglo(models.TextChoices):
    URA = 'URA', 'Arreglo rectangular uniforme'
    UCA = 'UCA', 'Arreglo circular uniforme'
    VS = 'VS', 'Sensor vectorial'


@dataclass(frozen=True)
class DirectionPair:
    azimuth: float
    elevation: float

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise FueraDeRangoError("Los ángulos deben ser finitos.")
        if not 0.0 <= self.azimuth < DOS_PI:
            raise FueraDeRangoError(f"Azimut fuera de [0, 2π): {self.azimuth}")
        if not 0.0 <= self.elevation < math.pi:
            raise FueraDeRangoError(f"Elevación fuera de [0, π): {self.elevation}")

    @classmethod
    def normalizada(cls, azimuth, elevation):
        """Envuelve el azimut y recorta la elevación a los rangos semiabiertos."""
        az = float(azimuth) % DOS_PI
        if az >= DOS_PI:
            az = 0.0
        el = min(max(float(elevation), 0.0), math.nextafter(math.pi, 0.0))
        return cls(az, el)

    @classmethod
    def desde_grados(cls, azimuth, elevation):
        return cls.normalizada(math.radians(azimuth), math.radians(elevation))

    def grados(self):
        return math.degrees(self.azimuth), math.degrees(self.elevation)

    def vector_unitario(self):
        s = math.sin(self.elevation)
        return np.array([
            s * math.cos(self.azimuth),
            s * math.sin(self.azimuth),
            math.cos(self.elevation),
        ])

    def plegada(self):
        """Refleja la elevación al hemisferio superior (ambigüedad de arreglos planos)."""
        return DirectionPair(self.azimuth, min(self.elevation, math.pi - self.elevation))


def distancia_angular(a, b):
    """Distancia de gran círculo entre dos direcciones, en radianes."""
    coseno = float(np.dot(a.vector_unitario(), b.vector_unitario()))
    return math.acos(min(1.0, max(-1.0, coseno)))


@dataclass(frozen=True)
class ArrayGeometry:
    kind: str
    element_count: int
    wavelength: float
    ura_rows: int = 0
    ura_cols: int = 0
    ura_spacing: tuple = (0.0, 0.0)
    uca_radius: float = 0.0
    vs_polarization: tuple = (math.pi / 4, 0.0)

    def __post_init__(self):
        if self.kind not in TipoArreglo.values:
            raise GeometriaInvalidaError(f"Tipo de arreglo desconocido: {self.kind}")
        object.__setattr__(self, 'kind', TipoArreglo(self.kind).value)
        if self.element_count < 1 or not self.wavelength > 0:
            raise GeometriaInvalidaError("E y λ deben ser positivos.")
        if self.kind == TipoArreglo.URA:
            if self.ura_rows < 1 or self.ura_cols < 1:
                raise GeometriaInvalidaError("La URA necesita L, W positivos.")
            if self.ura_rows * self.ura_cols != self.element_count:
                raise GeometriaInvalidaError("Para la URA, L·W debe ser igual a E.")
            if min(self.ura_spacing) <= 0:
                raise GeometriaInvalidaError("El espaciado de la URA debe ser positivo.")
        elif self.kind == TipoArreglo.UCA:
            if not self.uca_radius > 0:
                raise GeometriaInvalidaError("El radio de la UCA debe ser positivo.")
        elif self.element_count != 6:
            raise GeometriaInvalidaError("El sensor vectorial tiene exactamente 6 componentes.")

    # --- Constructores de los arreglos por defecto ---
    @classmethod
    def ura(cls, filas=2, columnas=3, espaciado=(0.1, 0.1), frecuencia=FRECUENCIA_PORTADORA):
        """URA con espaciado (d_L, d_W) expresado en longitudes de onda."""
        lam = VELOCIDAD_LUZ / frecuencia
        return cls(
            kind=TipoArreglo.URA, element_count=filas * columnas, wavelength=lam,
            ura_rows=filas, ura_cols=columnas,
            ura_spacing=(espaciado[0] * lam, espaciado[1] * lam),
        )

    @classmethod
    def uca(cls, elementos=6, radio=0.2, frecuencia=FRECUENCIA_PORTADORA):
        """UCA con radio expresado en longitudes de onda."""
        lam = VELOCIDAD_LUZ / frecuencia
        return cls(kind=TipoArreglo.UCA, element_count=elementos, wavelength=lam, uca_radius=radio * lam)

    @classmethod
    def vector_sensor(cls, polarizacion=(math.pi / 4, 0.0), frecuencia=FRECUENCIA_PORTADORA):
        lam = VELOCIDAD_LUZ / frecuencia
        return cls(kind=TipoArreglo.VS, element_count=6, wavelength=lam, vs_polarization=tuple(polarizacion))

    @property
    def simetria_especular(self):
        # Los arreglos planos no distinguen θ de π−θ.
        return self.kind in (TipoArreglo.URA, TipoArreglo.UCA)

    def descriptor(self):
        return {
            'kind': self.kind,
            'element_count': self.element_count,
            'wavelength': self.wavelength,
            'ura_rows': self.ura_rows,
            'ura_cols': self.ura_cols,
            'ura_spacing': list(self.ura_spacing),
            'uca_radius': self.uca_radius,
            'vs_polarization': list(self.vs_polarization),
        }

    @classmethod
    def desde_descriptor(cls, datos):
        datos = dict(datos)
        datos['ura_spacing'] = tuple(datos.get('ura_spacing', (0.0, 0.0)))
        datos['vs_polarization'] = tuple(datos.get('vs_polarization', (math.pi / 4, 0.0)))
        return cls(**datos)


ARREGLOS_POR_NOMBRE = {
    'ura': lambda f: ArrayGeometry.ura(frecuencia=f),
    'uca6': lambda f: ArrayGeometry.uca(elementos=6, frecuencia=f),
    'uca12': lambda f: ArrayGeometry.uca(elementos=12, frecuencia=f),
    'vs': lambda f: ArrayGeometry.vector_sensor(frecuencia=f),
}


def geometria_por_nombre(nombre, frecuencia=FRECUENCIA_PORTADORA):
    try:
        return ARREGLOS_POR_NOMBRE[nombre](frecuencia)
    except KeyError:
        raise GeometriaInvalidaError(
            f"Arreglo '{nombre}' no soportado; opciones: {', '.join(ARREGLOS_POR_NOMBRE)}"
        ) from None


# --- Evaluación vectorizada de la variedad ---

def _ura(geom, elev, azim):
    lam = geom.wavelength
    d_l, d_w = geom.ura_spacing
    i = np.arange(geom.ura_rows)[:, None]
    j = np.arange(geom.ura_cols)[None, :]
    s = np.sin(elev)[..., None, None]
    fase = DOS_PI * s * (
        np.cos(azim)[..., None, None] * i * d_w / lam
        + np.sin(azim)[..., None, None] * j * d_l / lam
    )
    return np.exp(1j * fase).reshape(*np.shape(elev), geom.element_count)


def _uca(geom, elev, azim):
    i = np.arange(geom.element_count)
    fase = DOS_PI * (geom.uca_radius / geom.wavelength) * np.sin(elev)[..., None] * np.cos(
        azim[..., None] - DOS_PI * i / geom.element_count
    )
    return np.exp(1j * fase)


def _vs(geom, elev, azim):
    gamma, eta = geom.vs_polarization
    p0 = math.sin(gamma) * np.exp(1j * eta)
    p1 = math.cos(gamma)
    ct, st = np.cos(elev), np.sin(elev)
    cp, sp = np.cos(azim), np.sin(azim)
    filas = [
        ct * cp * p0 - sp * p1,
        ct * sp * p0 + cp * p1,
        -st * p0,
        -sp * p0 - ct * cp * p1,
        cp * p0 - ct * sp * p1,
        st * p1,
    ]
    return np.stack(filas, axis=-1).astype(complex)


_DESPACHO = {
    TipoArreglo.URA.value: _ura,
    TipoArreglo.UCA.value: _uca,
    TipoArreglo.VS.value: _vs,
}


def steer_many(geom, elevaciones, azimuts):
    """Vectores de dirección para arreglos de ángulos; forma (..., E)."""
    elev = np.asarray(elevaciones, dtype=float)
    azim = np.asarray(azimuts, dtype=float)
    elev, azim = np.broadcast_arrays(elev, azim)
    return _DESPACHO[geom.kind](geom, elev, azim)


def _verificar_tipo(geom, tipo):
    if geom.kind != tipo:
        raise GeometriaInvalidaError(f"Se esperaba una geometría {tipo}, no {geom.kind}.")


def steer_ura(geom, direccion):
    _verificar_tipo(geom, TipoArreglo.URA)
    return steer_many(geom, direccion.elevation, direccion.azimuth)


def steer_uca(geom, direccion):
    _verificar_tipo(geom, TipoArreglo.UCA)
    return steer_many(geom, direccion.elevation, direccion.azimuth)


def steer_vs(geom, direccion):
    _verificar_tipo(geom, TipoArreglo.VS)
    return steer_many(geom, direccion.elevation, direccion.azimuth)


def steer(geom, direccion):
    return steer_many(geom, direccion.elevation, direccion.azimuth)


def steering_matrix(geom, direcciones):
    """Matriz E×n_M cuyas columnas son los vectores de dirección."""
    direcciones = list(direcciones)
    if not direcciones:
        raise EntradaVaciaError("Se requiere al menos una dirección.")
    elev = np.array([d.elevation for d in direcciones])
    azim = np.array([d.azimuth for d in direcciones])
    return steer_many(geom, elev, azim).T
