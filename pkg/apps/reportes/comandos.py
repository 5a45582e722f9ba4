"""
Base común de los comandos de gestión: banderas compartidas, lectura del
archivo key=value, escritura de artefactos y registro en la bitácora.
"""
import csv
import hashlib
import json
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from apps.arreglos.geometria import ARREGLOS_POR_NOMBRE, geometria_por_nombre
from apps.auditoria.utils import log_action
from config.exceptions import ArchivoError, ErrorDominio

logger = logging.getLogger(__name__)

TAREAS_CLI = {5: 'five', 9: 'nine', 18: 'eighteen', 19: 'eighteen'}


def leer_config(path):
    """Archivo plano key=value: una clave por línea, '#' inicia comentario."""
    if not path:
        return {}
    try:
        texto = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ArchivoError(f"No se pudo leer la configuración '{path}': {e}") from e
    datos = {}
    for numero, linea in enumerate(texto.splitlines(), start=1):
        linea = linea.split('#', 1)[0].strip()
        if not linea:
            continue
        clave, separador, valor = linea.partition('=')
        if not separador or not clave.strip():
            raise serializers.ValidationError({'config': f"Línea {numero} sin formato key=value: '{linea}'"})
        datos[clave.strip()] = valor.strip()
    return datos


def validar_config(datos, *serializadores):
    """
    Reparte las claves entre los serializadores y devuelve sus objetos
    creados, en el mismo orden. Una clave que ninguno reconoce es un error.
    """
    conocidas = set()
    for clase in serializadores:
        conocidas.update(clase().fields)
    desconocidas = sorted(set(datos) - conocidas)
    if desconocidas:
        raise serializers.ValidationError({clave: "Clave de configuración desconocida." for clave in desconocidas})

    objetos = []
    for clase in serializadores:
        campos = clase().fields
        serializer = clase(data={k: v for k, v in datos.items() if k in campos})
        serializer.is_valid(raise_exception=True)
        objetos.append(serializer.save())
    return objetos


def sha256_archivo(path):
    h = hashlib.sha256()
    with open(path, 'rb') as archivo:
        for bloque in iter(lambda: archivo.read(1 << 20), b''):
            h.update(bloque)
    return h.hexdigest()


def escribir_csv(path, cabecera, filas):
    try:
        with open(path, 'w', newline='', encoding='utf-8') as archivo:
            escritor = csv.writer(archivo, lineterminator='\n')
            escritor.writerow(cabecera)
            escritor.writerows(filas)
    except OSError as e:
        raise ArchivoError(f"No se pudo escribir '{path}': {e}") from e
    return path


def escribir_json(path, datos):
    try:
        Path(path).write_text(json.dumps(datos, indent=2, sort_keys=True, ensure_ascii=False) + '\n',
                              encoding='utf-8')
    except OSError as e:
        raise ArchivoError(f"No se pudo escribir '{path}': {e}") from e
    return path


def _mensaje(error):
    if isinstance(error, serializers.ValidationError):
        return json.dumps(error.detail, ensure_ascii=False, default=str)
    return str(error)


class ComandoDoA(BaseCommand):
    """
    Las subclases definen `accion` e implementan `ejecutar(**opciones)`, que
    devuelve un dict con 'objeto' (ruta del artefacto principal), 'resumen'
    (métricas para la bitácora y stdout) y opcionalmente 'tiempos'.
    """
    accion = None

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None, help="Archivo key=value con la configuración")
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out', default=None, help="Directorio de salida")
        parser.add_argument('--array', choices=sorted(ARREGLOS_POR_NOMBRE), default=None)
        self.agregar_argumentos(parser)

    def agregar_argumentos(self, parser):
        pass

    def ejecutar(self, **opciones):
        raise NotImplementedError

    def directorio_salida(self, opciones):
        salida = Path(opciones.get('out') or settings.DOA['SALIDA_DIR'])
        try:
            salida.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArchivoError(f"No se pudo crear el directorio '{salida}': {e}") from e
        return salida

    def geometria(self, opciones):
        nombre = opciones.get('array') or settings.DOA['ARREGLO']
        return nombre, geometria_por_nombre(nombre)

    def handle(self, *args, **opciones):
        try:
            if opciones['seed'] < 0:
                raise serializers.ValidationError({'seed': "La semilla debe ser >= 0."})
            resultado = self.ejecutar(**opciones)
        except (ErrorDominio, serializers.ValidationError) as e:
            mensaje = _mensaje(e)
            self.stderr.write(json.dumps({'error': mensaje}, ensure_ascii=False))
            logger.error("%s falló: %s", self.accion, mensaje)
            raise CommandError(mensaje) from e

        objeto = resultado.get('objeto')
        digest = sha256_archivo(objeto) if objeto else None
        log_action(self.accion, objeto=objeto, semilla=opciones['seed'], digest=digest,
                   extra=resultado.get('resumen'))
        salida = {'accion': self.accion, 'objeto': str(objeto) if objeto else None, 'digest': digest,
                  **(resultado.get('resumen') or {})}
        if resultado.get('tiempos'):
            salida['tiempos'] = {k: round(v, 6) for k, v in resultado['tiempos'].items()}
        self.stdout.write(json.dumps(salida, ensure_ascii=False, sort_keys=True, default=str))
