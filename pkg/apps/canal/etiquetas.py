"""
Espacio de etiquetas de orden de modelo.

Cada una de las 18 clases corresponde a una partición de n_M trayectos entre
n_S fuentes; n_P es la parte más grande. La clase 19 marca escenas
sobrecargadas (n_M > E-1).
"""
from dataclasses import dataclass

from config.exceptions import EtiquetaInvalidaError, FueraDeRangoError

CLASE_SOBRECARGADA = 19

# clase18: (n_S, n_M, n_P, clase9, clase5, trayectos por fuente)
TABLA_ETIQUETAS = {
    1: (1, 1, 1, 1, 1, (1,)),
    2: (1, 2, 2, 2, 2, (2,)),
    3: (2, 2, 1, 3, 2, (1, 1)),
    4: (1, 3, 3, 4, 3, (3,)),
    5: (2, 3, 2, 5, 3, (2, 1)),
    6: (3, 3, 1, 5, 3, (1, 1, 1)),
    7: (1, 4, 4, 6, 4, (4,)),
    8: (2, 4, 3, 7, 4, (3, 1)),
    9: (2, 4, 2, 7, 4, (2, 2)),
    10: (3, 4, 2, 7, 4, (2, 1, 1)),
    11: (4, 4, 1, 7, 4, (1, 1, 1, 1)),
    12: (1, 5, 5, 8, 5, (5,)),
    13: (2, 5, 4, 9, 5, (4, 1)),
    14: (2, 5, 3, 9, 5, (3, 2)),
    15: (3, 5, 3, 9, 5, (3, 1, 1)),
    16: (3, 5, 2, 9, 5, (2, 2, 1)),
    17: (4, 5, 2, 9, 5, (2, 1, 1, 1)),
    18: (5, 5, 1, 9, 5, (1, 1, 1, 1, 1)),
}

_POR_TUPLA = {fila[:3]: clase for clase, fila in TABLA_ETIQUETAS.items()}

TAREAS = {'five': 5, 'nine': 9, 'eighteen': 18}


@dataclass(frozen=True)
class ModelOrderLabel:
    n_S: int
    n_M: int
    n_P: int
    class18: int

    @property
    def sobrecargada(self):
        return self.class18 == CLASE_SOBRECARGADA

    @property
    def class9(self):
        return coarsen_label(self.class18, 'nine')

    @property
    def class5(self):
        return coarsen_label(self.class18, 'five')


def _validar_clase(class18):
    if not 1 <= int(class18) <= CLASE_SOBRECARGADA:
        raise FueraDeRangoError(f"Clase fuera de 1..19: {class18}")


def encode_label(n_S, n_M, n_P):
    try:
        return _POR_TUPLA[(int(n_S), int(n_M), int(n_P))]
    except KeyError:
        raise EtiquetaInvalidaError(
            f"La tupla ({n_S}, {n_M}, {n_P}) no pertenece al espacio de etiquetas."
        ) from None


def decode_label(class18):
    _validar_clase(class18)
    if class18 == CLASE_SOBRECARGADA:
        raise EtiquetaInvalidaError("La clase sobrecargada no tiene tupla asociada.")
    return TABLA_ETIQUETAS[int(class18)][:3]


def coarsen_label(class18, task):
    """Agrupa la clase de 18 (o 19) según la tarea 'five' o 'nine'."""
    _validar_clase(class18)
    if task == 'eighteen':
        return int(class18)
    if task not in ('five', 'nine'):
        raise FueraDeRangoError(f"Tarea desconocida: {task}")
    if class18 == CLASE_SOBRECARGADA:
        return TAREAS[task] + 1
    fila = TABLA_ETIQUETAS[int(class18)]
    return fila[3] if task == 'nine' else fila[4]


def trayectos_por_fuente(class18):
    _validar_clase(class18)
    if class18 == CLASE_SOBRECARGADA:
        raise EtiquetaInvalidaError("La clase sobrecargada no define una partición fija.")
    return TABLA_ETIQUETAS[int(class18)][5]


def patron_letras(class18):
    """Notación por letras de la partición, p. ej. (A,A,B,B,C) para la clase 16."""
    letras = []
    for indice, cantidad in enumerate(trayectos_por_fuente(class18)):
        letras.extend([chr(ord('A') + indice)] * cantidad)
    return '(' + ','.join(letras) + ')'


def etiqueta_desde_trayectos(trayectos):
    """Construye la etiqueta a partir de los conteos de trayectos por fuente."""
    n_S, n_M, n_P = len(trayectos), sum(trayectos), max(trayectos)
    if n_M > 5:
        return ModelOrderLabel(n_S, n_M, n_P, CLASE_SOBRECARGADA)
    return ModelOrderLabel(n_S, n_M, n_P, encode_label(n_S, n_M, n_P))
