"""
Checkpoint de red: cabecera JSON + bloque float32 little-endian.

Formato:
    b"DOACKPT <longitud> <json>\\n"
    parámetros, estadísticas de batch-norm y, si hay optimizador, momentos m y v
    de Adam, en el orden del manifiesto de la cabecera.
"""
import json
import logging

import numpy as np

from config.exceptions import ArchivoError
from .optimizadores import Adam
from .red import construir

logger = logging.getLogger(__name__)

MAGICO = b'DOACKPT'
VERSION = 1
DTYPE_DISCO = np.dtype('<f4')


def _tensores(red, optimizador):
    tensores = [(nombre, valor) for nombre, valor, _ in red.parametros()]
    tensores += list(red.estadisticas())
    if optimizador is not None and optimizador.m:
        nombres = [nombre for nombre, _, _ in red.parametros()]
        tensores += [(f"adam.m.{n}", m) for n, m in zip(nombres, optimizador.m)]
        tensores += [(f"adam.v.{n}", v) for n, v in zip(nombres, optimizador.v)]
    return tensores


def save_checkpoint(path, red, optimizador=None, extra=None):
    tensores = _tensores(red, optimizador)
    meta = {
        'version': VERSION,
        'architecture': red.descriptor,
        'num_classes': red.num_classes,
        'E': red.E,
        'adam': optimizador.estado() if optimizador is not None else None,
        'manifest': [[nombre, list(valor.shape)] for nombre, valor in tensores],
        'extra': extra or {},
    }
    cuerpo = json.dumps(meta, sort_keys=True, separators=(',', ':')).encode('ascii')
    try:
        with open(path, 'wb') as archivo:
            archivo.write(MAGICO + b' ' + str(len(cuerpo)).encode('ascii') + b' ' + cuerpo + b'\n')
            for _, valor in tensores:
                archivo.write(np.ascontiguousarray(valor, dtype=DTYPE_DISCO).tobytes())
    except OSError as e:
        raise ArchivoError(f"No se pudo escribir el checkpoint '{path}': {e}") from e
    logger.info("Checkpoint guardado en %s (%d tensores)", path, len(tensores))
    return meta


def load_checkpoint(path):
    """Devuelve (red, optimizador o None, metadatos)."""
    try:
        with open(path, 'rb') as archivo:
            contenido = archivo.read()
    except OSError as e:
        raise ArchivoError(f"No se pudo leer el checkpoint '{path}': {e}") from e
    try:
        magico, longitud, resto = contenido.split(b' ', 2)
        longitud = int(longitud)
        if magico != MAGICO or resto[longitud:longitud + 1] != b'\n':
            raise ValueError("cabecera inválida")
        meta = json.loads(resto[:longitud].decode('ascii'))
    except ValueError as e:
        raise ArchivoError(f"'{path}' no es un checkpoint válido: {e}") from e
    if meta.get('version') != VERSION:
        raise ArchivoError(f"Versión de checkpoint no soportada: {meta.get('version')}")

    arquitectura = meta['architecture']
    red = construir(arquitectura['arquitectura'], meta['num_classes'], meta['E'], **arquitectura['kwargs'])
    blob = np.frombuffer(resto[longitud + 1:], dtype=DTYPE_DISCO)
    esperado = sum(int(np.prod(forma)) for _, forma in meta['manifest'])
    if blob.size != esperado:
        raise ArchivoError(f"'{path}' está truncado: {blob.size} valores de {esperado}.")

    leidos, cursor = {}, 0
    for nombre, forma in meta['manifest']:
        n = int(np.prod(forma))
        leidos[nombre] = blob[cursor:cursor + n].reshape(forma)
        cursor += n

    for hoja_nombre, valor, _ in red.parametros():
        valor[...] = leidos[hoja_nombre]
    for hoja_nombre, valor in red.estadisticas():
        valor[...] = leidos[hoja_nombre]

    optimizador = None
    if meta['adam'] is not None:
        estado = meta['adam']
        optimizador = Adam(lr=estado['lr'], beta1=estado['beta1'], beta2=estado['beta2'], eps=estado['eps'])
        optimizador.t = estado['t']
        nombres = [nombre for nombre, _, _ in red.parametros()]
        if f"adam.m.{nombres[0]}" in leidos:
            optimizador.m = [leidos[f"adam.m.{n}"].astype(np.float32) for n in nombres]
            optimizador.v = [leidos[f"adam.v.{n}"].astype(np.float32) for n in nombres]
    return red, optimizador, meta
