"""
Archivo de dataset: cabecera JSON con prefijo de longitud + registros binarios fijos.

Formato:
    b"DOAMOE <longitud> <json>\\n" seguido de `count` registros little-endian
    con el dtype de `dtype_registro(E)`.
"""
import hashlib
import json
import logging

import numpy as np

from apps.arreglos.geometria import ArrayGeometry
from apps.covarianza.estimacion import estimate_covariance, to_feature
from config.exceptions import ArchivoError, FueraDeRangoError
from .escenarios import ScenarioConfig, sample_scenario, synthesize_block, synthesize_blocks

logger = logging.getLogger(__name__)

MAGICO = b'DOAMOE'
VERSION = 1
MAX_DIRECCIONES = 5
TAMANO_LOTE_ESCRITURA = 512


def dtype_registro(E):
    return np.dtype([
        ('feature', '<f4', (E * E * 2,)),
        ('n_s', 'u1'),
        ('n_m', 'u1'),
        ('n_p', 'u1'),
        ('class18', 'u1'),
        ('snr', '<f4'),
        ('doas', '<f4', (MAX_DIRECCIONES, 2)),
        ('overloaded', 'u1'),
        ('seed', '<u8'),
    ])


def semilla_registro(seed, indice):
    """Semilla privada de 64 bits del registro `indice`, derivada de (seed, indice)."""
    return int(np.random.SeedSequence([int(seed), int(indice)]).generate_state(1, dtype=np.uint64)[0])


def generar_registro(config, geom, semilla):
    rng = np.random.default_rng(semilla)
    escenario = sample_scenario(rng, config)
    bloque = synthesize_block(escenario, geom, 0, rng)
    caracteristica = to_feature(estimate_covariance(bloque))

    doas = np.full((MAX_DIRECCIONES, 2), np.nan, dtype=np.float32)
    for k, direccion in enumerate(escenario.direcciones()[:MAX_DIRECCIONES]):
        doas[k] = (direccion.elevation, direccion.azimuth)

    etiqueta = escenario.label
    return (
        caracteristica.astype(np.float32).ravel(),
        etiqueta.n_S, etiqueta.n_M, etiqueta.n_P, etiqueta.class18,
        np.float32(escenario.los_snr),
        doas,
        int(etiqueta.sobrecargada),
        np.uint64(semilla),
    ), escenario


def _cabecera(config, geom, count, seed, nombre_arreglo):
    meta = {
        'version': VERSION,
        'array': nombre_arreglo or geom.kind,
        'geometry': geom.descriptor(),
        'E': geom.element_count,
        'N': config.samples_per_block,
        'count': int(count),
        'seed': int(seed),
        'config': config.echo(),
    }
    cuerpo = json.dumps(meta, sort_keys=True, separators=(',', ':')).encode('ascii')
    return MAGICO + b' ' + str(len(cuerpo)).encode('ascii') + b' ' + cuerpo + b'\n'


def generate_dataset(config, count, seed, path, geom, nombre_arreglo=None):
    """
    Escribe `count` registros deterministas para (config, count, seed).

    Devuelve un resumen con la ruta, el digest SHA-256 y el conteo por clase.
    """
    if count < 1:
        raise FueraDeRangoError("count debe ser >= 1.")
    if config.samples_per_block < geom.element_count:
        raise FueraDeRangoError("N debe ser al menos E.")

    dtype = dtype_registro(geom.element_count)
    digest = hashlib.sha256()
    conteo_clases = np.zeros(20, dtype=np.int64)
    try:
        with open(path, 'wb') as archivo:
            cabecera = _cabecera(config, geom, count, seed, nombre_arreglo)
            archivo.write(cabecera)
            digest.update(cabecera)
            for inicio in range(0, count, TAMANO_LOTE_ESCRITURA):
                fin = min(count, inicio + TAMANO_LOTE_ESCRITURA)
                lote = np.empty(fin - inicio, dtype=dtype)
                for k in range(inicio, fin):
                    registro, _ = generar_registro(config, geom, semilla_registro(seed, k))
                    lote[k - inicio] = registro
                    conteo_clases[registro[4]] += 1
                datos = lote.tobytes()
                archivo.write(datos)
                digest.update(datos)
                logger.debug("Registros %d-%d escritos en %s", inicio, fin - 1, path)
    except OSError as e:
        raise ArchivoError(f"No se pudo escribir el dataset '{path}': {e}") from e

    return {
        'path': str(path),
        'count': int(count),
        'digest': digest.hexdigest(),
        'class_counts': {str(c): int(n) for c, n in enumerate(conteo_clases) if n},
    }


def read_dataset(path):
    """Devuelve (metadatos, registros estructurados)."""
    try:
        with open(path, 'rb') as archivo:
            contenido = archivo.read()
    except OSError as e:
        raise ArchivoError(f"No se pudo leer el dataset '{path}': {e}") from e

    try:
        magico, longitud, resto = contenido.split(b' ', 2)
        longitud = int(longitud)
        if magico != MAGICO or resto[longitud:longitud + 1] != b'\n':
            raise ValueError("cabecera inválida")
        meta = json.loads(resto[:longitud].decode('ascii'))
    except ValueError as e:
        raise ArchivoError(f"'{path}' no es un dataset válido: {e}") from e

    if meta.get('version') != VERSION:
        raise ArchivoError(f"Versión de dataset no soportada: {meta.get('version')}")
    dtype = dtype_registro(meta['E'])
    cuerpo = resto[longitud + 1:]
    if len(cuerpo) != meta['count'] * dtype.itemsize:
        raise ArchivoError(f"'{path}' está truncado o tiene registros de más.")
    return meta, np.frombuffer(cuerpo, dtype=dtype)


def features_and_labels(meta, registros):
    """Características (n, E, E, 2) float32 y etiquetas class18."""
    E = meta['E']
    caracteristicas = registros['feature'].reshape(-1, E, E, 2)
    return caracteristicas, registros['class18'].astype(np.int64)


def regenerate_blocks(registro, meta, count):
    """Regenera los `count` primeros bloques del registro a partir de su semilla."""
    config = ScenarioConfig.desde_echo(meta['config'])
    geom = ArrayGeometry.desde_descriptor(meta['geometry'])
    rng = np.random.default_rng(int(registro['seed']))
    escenario = sample_scenario(rng, config)
    return escenario, synthesize_blocks(escenario, geom, count, rng)
