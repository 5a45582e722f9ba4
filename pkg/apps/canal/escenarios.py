"""
Escenarios multitrayecto coherentes con desvanecimiento por bloques.

Cada fuente emite una forma de onda QPSK propia; sus trayectos son copias
retardadas que llegan desde direcciones dentro de un cono alrededor de la
dirección LOS. Las ganancias complejas se redibujan en cada bloque.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from apps.arreglos.geometria import DirectionPair, steer
from config.exceptions import EntradaInvalidaError, FueraDeRangoError
from .etiquetas import CLASE_SOBRECARGADA, ModelOrderLabel, TABLA_ETIQUETAS, etiqueta_desde_trayectos, trayectos_por_fuente
from .senales import MUESTRAS_POR_SIMBOLO, gen_source_symbols

VELOCIDAD_LUZ = 299792458.0


@dataclass(frozen=True)
class ScenarioConfig:
    snr_range: tuple = (-10.0, 10.0)
    samples_per_block: int = 200
    multipath_power_range: tuple = (-3.0, 0.0)
    delay_range: tuple = (1, 20)
    cone_half_angle: float = 15.0
    carrier: float = 2.7e9
    max_velocity: float = 100.0
    samples_per_symbol: int = MUESTRAS_POR_SIMBOLO
    overloaded_fraction: float = 0.0
    classes: tuple = tuple(range(1, 19))

    def __post_init__(self):
        for nombre in ('snr_range', 'multipath_power_range', 'delay_range'):
            lo, hi = getattr(self, nombre)
            if lo > hi:
                raise FueraDeRangoError(f"Rango vacío en {nombre}: ({lo}, {hi})")
        if self.delay_range[0] < 0:
            raise FueraDeRangoError("Los retardos no pueden ser negativos.")
        if self.samples_per_block < 1 or self.samples_per_symbol < 1:
            raise FueraDeRangoError("N y muestras por símbolo deben ser positivos.")
        if not 0.0 < self.cone_half_angle <= 90.0:
            raise FueraDeRangoError("El semiángulo del cono debe estar en (0, 90] grados.")
        if not 0.0 <= self.overloaded_fraction <= 1.0:
            raise FueraDeRangoError("overloaded_fraction debe estar en [0, 1].")
        if not self.classes or any(c not in TABLA_ETIQUETAS for c in self.classes):
            raise FueraDeRangoError("classes debe ser un subconjunto no vacío de 1..18.")

    @property
    def coherence_time(self):
        return VELOCIDAD_LUZ / (self.max_velocity * self.carrier)

    def echo(self):
        datos = asdict(self)
        for clave, valor in datos.items():
            if isinstance(valor, tuple):
                datos[clave] = list(valor)
        return datos

    @classmethod
    def desde_echo(cls, datos):
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in datos.items()})


@dataclass(frozen=True)
class Trayecto:
    direction: DirectionPair
    delay: int
    power_db: float


@dataclass(frozen=True)
class Scenario:
    label: ModelOrderLabel
    paths: tuple
    source_seeds: tuple
    los_snr: float
    noise_variance: float
    samples_per_block: int
    samples_per_symbol: int = MUESTRAS_POR_SIMBOLO

    def trayectos(self):
        """Trayectos aplanados en orden (fuente, trayecto)."""
        return [t for fuente in self.paths for t in fuente]

    def direcciones(self):
        return [t.direction for t in self.trayectos()]

    def fuente_de_trayecto(self):
        return [s for s, fuente in enumerate(self.paths) for _ in fuente]

    @property
    def max_delay(self):
        return max(t.delay for t in self.trayectos())


@dataclass(frozen=True)
class Snapshot:
    samples: np.ndarray
    block_index: int
    gains: tuple = field(default=())

    def __post_init__(self):
        if self.samples.ndim != 2:
            raise EntradaInvalidaError("Las muestras deben ser una matriz E×N.")
        if not np.all(np.isfinite(self.samples)):
            raise EntradaInvalidaError("Las muestras contienen valores no finitos.")


# --- Muestreo de direcciones ---

def direccion_uniforme(rng):
    """Dirección uniforme sobre la esfera (densidad de elevación ∝ sin)."""
    azimut = rng.uniform(0.0, 2.0 * math.pi)
    elevacion = math.acos(1.0 - 2.0 * rng.uniform())
    return DirectionPair.normalizada(azimut, elevacion)


def direccion_en_cono(rng, eje, semiangulo):
    """Dirección uniforme sobre el casquete de semiángulo dado alrededor de `eje`."""
    cos_alfa = rng.uniform(math.cos(semiangulo), 1.0)
    alfa = math.acos(cos_alfa)
    beta = rng.uniform(0.0, 2.0 * math.pi)

    th, ph = eje.elevation, eje.azimuth
    u = eje.vector_unitario()
    e1 = np.array([math.cos(th) * math.cos(ph), math.cos(th) * math.sin(ph), -math.sin(th)])
    e2 = np.array([-math.sin(ph), math.cos(ph), 0.0])
    v = math.cos(alfa) * u + math.sin(alfa) * (math.cos(beta) * e1 + math.sin(beta) * e2)

    elevacion = math.acos(min(1.0, max(-1.0, v[2])))
    azimut = math.atan2(v[1], v[0])
    return DirectionPair.normalizada(azimut, elevacion)


def _trayectos_sobrecargados(rng):
    n_M = int(rng.integers(6, 9))
    n_S = int(rng.integers(1, 6))
    extra = rng.multinomial(n_M - n_S, np.full(n_S, 1.0 / n_S))
    return tuple(int(1 + e) for e in extra)


def sample_scenario(rng, config, forced_class18=None):
    if forced_class18 is not None:
        if not 1 <= int(forced_class18) <= CLASE_SOBRECARGADA:
            raise FueraDeRangoError(f"Clase forzada fuera de 1..19: {forced_class18}")
        clase = int(forced_class18)
    elif config.overloaded_fraction > 0 and rng.uniform() < config.overloaded_fraction:
        clase = CLASE_SOBRECARGADA
    else:
        clase = int(rng.choice(config.classes))

    if clase == CLASE_SOBRECARGADA:
        conteos = _trayectos_sobrecargados(rng)
    else:
        conteos = trayectos_por_fuente(clase)
    etiqueta = etiqueta_desde_trayectos(conteos)

    semiangulo = math.radians(config.cone_half_angle)
    fuentes, semillas = [], []
    for k in conteos:
        los = direccion_uniforme(rng)
        trayectos = [Trayecto(los, 0, 0.0)]
        for _ in range(k - 1):
            trayectos.append(Trayecto(
                direction=direccion_en_cono(rng, los, semiangulo),
                delay=int(rng.integers(config.delay_range[0], config.delay_range[1] + 1)),
                power_db=float(rng.uniform(*config.multipath_power_range)),
            ))
        fuentes.append(tuple(trayectos))
        semillas.append(int(rng.integers(0, 2 ** 63 - 1)))

    snr = float(rng.uniform(*config.snr_range))
    return Scenario(
        label=etiqueta,
        paths=tuple(fuentes),
        source_seeds=tuple(semillas),
        los_snr=snr,
        noise_variance=10.0 ** (-snr / 10.0),
        samples_per_block=config.samples_per_block,
        samples_per_symbol=config.samples_per_symbol,
    )


def synthesize_block(scenario, geom, block_index, rng):
    """
    Bloque X_b (E×N): suma de trayectos con ganancias nuevas por bloque más AWGN.

    La forma de onda de cada fuente en el bloque b se deriva de
    (semilla de la fuente, b); sus trayectos leen S(n + δ).
    """
    if block_index < 0:
        raise FueraDeRangoError("block_index debe ser >= 0.")
    n = scenario.samples_per_block
    if n < geom.element_count:
        raise FueraDeRangoError("N debe ser al menos E.")
    retardo_max = scenario.max_delay

    muestras = np.zeros((geom.element_count, n), dtype=complex)
    ganancias = []
    for trayectos, semilla in zip(scenario.paths, scenario.source_seeds):
        onda = gen_source_symbols((semilla, block_index), n + retardo_max, sps=scenario.samples_per_symbol)
        h = (rng.standard_normal(len(trayectos)) + 1j * rng.standard_normal(len(trayectos))) / math.sqrt(2.0)
        for g, tr in zip(h, trayectos):
            amplitud = 10.0 ** (tr.power_db / 20.0)
            a = steer(geom, tr.direction)
            muestras += (g * amplitud) * np.outer(a, onda[tr.delay:tr.delay + n])
        ganancias.append(h)

    if scenario.noise_variance > 0:
        sigma = math.sqrt(scenario.noise_variance / 2.0)
        muestras += sigma * (rng.standard_normal(muestras.shape) + 1j * rng.standard_normal(muestras.shape))

    return Snapshot(samples=muestras, block_index=block_index, gains=tuple(ganancias))


def synthesize_blocks(scenario, geom, count, rng):
    return [synthesize_block(scenario, geom, b, rng) for b in range(count)]
