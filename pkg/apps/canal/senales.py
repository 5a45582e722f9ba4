"""Formas de onda QPSK conformadas con coseno alzado raíz (RRC)."""
import math

import numpy as np
from scipy import signal

from config.exceptions import FueraDeRangoError

MUESTRAS_POR_SIMBOLO = 32
ROLLOFF = 0.35
SPAN_SIMBOLOS = 8

_QPSK = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2)


def rrc_taps(rolloff=ROLLOFF, span=SPAN_SIMBOLOS, sps=MUESTRAS_POR_SIMBOLO):
    """Coeficientes RRC de energía unitaria, longitud span·sps + 1."""
    if not 0 < rolloff <= 1:
        raise FueraDeRangoError("El roll-off debe estar en (0, 1].")
    if span <= 0 or sps <= 0:
        raise FueraDeRangoError("span y sps deben ser positivos.")

    n = span * sps
    t = np.arange(-n // 2, n // 2 + 1) / sps
    h = np.empty_like(t)

    centro = np.isclose(t, 0.0, atol=1e-12)
    singular = np.isclose(np.abs(4.0 * rolloff * t), 1.0, atol=1e-8)
    general = ~(centro | singular)

    h[centro] = 1.0 + rolloff * (4.0 / math.pi - 1.0)
    h[singular] = (rolloff / math.sqrt(2.0)) * (
        (1.0 + 2.0 / math.pi) * math.sin(math.pi / (4.0 * rolloff))
        + (1.0 - 2.0 / math.pi) * math.cos(math.pi / (4.0 * rolloff))
    )
    tg = t[general]
    num = np.sin(math.pi * tg * (1.0 - rolloff)) + 4.0 * rolloff * tg * np.cos(math.pi * tg * (1.0 + rolloff))
    den = math.pi * tg * (1.0 - (4.0 * rolloff * tg) ** 2)
    h[general] = num / den

    return h / np.sqrt(np.sum(h ** 2))


def gen_source_symbols(seed, n_samples, sps=MUESTRAS_POR_SIMBOLO, rolloff=ROLLOFF, span=SPAN_SIMBOLOS):
    """
    Secuencia QPSK de potencia media unitaria conformada con RRC.

    `seed` acepta un entero o una secuencia de enteros (p. ej. (semilla, bloque)).
    Se descarta el transitorio del filtro: todas las muestras devueltas están
    en régimen permanente.
    """
    if n_samples < 1:
        raise FueraDeRangoError("n_samples debe ser >= 1.")
    rng = np.random.default_rng(seed)
    taps = rrc_taps(rolloff, span, sps)
    transitorio = len(taps) - 1
    n_simbolos = math.ceil((transitorio + n_samples - 1) / sps) + 1
    simbolos = _QPSK[rng.integers(0, 4, size=n_simbolos)]
    forma = signal.upfirdn(taps, simbolos, up=sps) * math.sqrt(sps)
    return forma[transitorio:transitorio + n_samples]
