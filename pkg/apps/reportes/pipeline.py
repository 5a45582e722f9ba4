"""
Flujo completo sobre una escena: bloque 1 → MOE → suavizado temporal con
B = n̂_P + 1 → MUSIC con n̂_M → filtrado espacial → asociación mejorada.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from apps.arreglos.geometria import steer
from apps.asociacion.algoritmos import associate_enhanced, associate_greedy
from apps.asociacion.filtrado import (
    RETARDO_MAXIMO, UMBRAL_CORRELACION, correlador_por_bloques, extract_signal, spatial_filter_weights,
)
from apps.canal.etiquetas import CLASE_SOBRECARGADA, TABLA_ETIQUETAS, ModelOrderLabel, encode_label
from apps.covarianza.estimacion import estimate_covariance, temporal_smooth, to_feature
from apps.doa.music import estimate_doas, music_spectrum, picos_espectro
from apps.orden.criterios import mdl_estimate
from apps.predicciones.red import predict
from config.exceptions import BloquesInsuficientesError, EntradaVaciaError

logger = logging.getLogger(__name__)

ETIQUETA_SOBRECARGADA = ModelOrderLabel(0, 0, 0, CLASE_SOBRECARGADA)


def etiqueta_de_clase(class18):
    if class18 == CLASE_SOBRECARGADA:
        return ETIQUETA_SOBRECARGADA
    n_S, n_M, n_P = TABLA_ETIQUETAS[int(class18)][:3]
    return ModelOrderLabel(n_S, n_M, n_P, int(class18))


# --- Estimadores de orden ---
# Todos reciben la covarianza del primer bloque y devuelven una ModelOrderLabel.

class EstimadorOraculo:
    def __init__(self, etiqueta):
        self.etiqueta = etiqueta

    def __call__(self, cov):
        return self.etiqueta


class EstimadorRed:
    def __init__(self, red):
        self.red = red

    def __call__(self, cov):
        clases, _ = predict(self.red, to_feature(cov)[None].astype(np.float32))
        return etiqueta_de_clase(int(clases[0]))


class EstimadorMDL:
    """MDL solo estima n_M; se asume una fuente por trayecto (n_S = n_M, n_P = 1)."""

    def __call__(self, cov):
        n_M = max(1, mdl_estimate(cov, cov.snapshot_count))
        if n_M > 5:
            return ETIQUETA_SOBRECARGADA
        return ModelOrderLabel(n_M, n_M, 1, encode_label(n_M, n_M, 1))


@dataclass(frozen=True)
class PipelineReport:
    label: ModelOrderLabel
    bloques_suavizado: int = 0
    doas: tuple = ()
    partition: tuple = ()
    correlation_count: int = 0
    corta: bool = False
    tiempos: dict = field(default_factory=dict)
    espectro: object = None

    @property
    def sobrecargada(self):
        return self.label.sobrecargada

    def como_dict(self):
        """Resumen serializable; sin tiempos para que los artefactos sean reproducibles."""
        return {
            'class18': self.label.class18,
            'label': [self.label.n_S, self.label.n_M, self.label.n_P],
            'overloaded': self.sobrecargada,
            'smoothing_blocks': self.bloques_suavizado,
            'doas_deg': [[round(v, 4) for v in d.grados()] for d in self.doas],
            'partition': [list(c) for c in self.partition],
            'correlation_count': self.correlation_count,
            'short': self.corta,
        }


def run_pipeline(blocks, geom, model, grid=None, threshold=UMBRAL_CORRELACION, max_lag=RETARDO_MAXIMO,
                 conservar_espectro=False):
    """
    `model` es cualquier invocable cov → ModelOrderLabel (oráculo, red o MDL).

    Lanza BloquesInsuficientesError con el número de bloques requerido cuando
    no alcanzan para B = n̂_P + 1.
    """
    blocks = list(blocks)
    if not blocks:
        raise EntradaVaciaError("No hay bloques que procesar.")
    tiempos = {}

    inicio = time.perf_counter()
    cov0 = estimate_covariance(blocks[0])
    etiqueta = model(cov0)
    tiempos['moe'] = time.perf_counter() - inicio
    if etiqueta.sobrecargada:
        logger.info("Escena sobrecargada; se omiten DoA y asociación.")
        return PipelineReport(label=etiqueta, tiempos=tiempos)

    B = etiqueta.n_P + 1
    requeridos = 2 * B - 1
    if len(blocks) < requeridos:
        raise BloquesInsuficientesError(requeridos, len(blocks))

    inicio = time.perf_counter()
    usados = blocks[0:requeridos:2]
    suavizada = temporal_smooth([cov0] + [estimate_covariance(b) for b in blocks[1:requeridos]], B)
    tiempos['suavizado'] = time.perf_counter() - inicio

    inicio = time.perf_counter()
    espectro = None
    if conservar_espectro:
        espectro = music_spectrum(suavizada, etiqueta.n_M, geom, grid)
        estimacion = picos_espectro(espectro, etiqueta.n_M, hemisferio_superior=geom.simetria_especular)
    else:
        estimacion = estimate_doas(suavizada, etiqueta.n_M, geom, grid)
    tiempos['music'] = time.perf_counter() - inicio

    inicio = time.perf_counter()
    senales = []
    for direccion in estimacion.direcciones:
        pesos = spatial_filter_weights(suavizada, steer(geom, direccion))
        senales.append([extract_signal(pesos, b) for b in usados])
    tiempos['filtrado'] = time.perf_counter() - inicio

    inicio = time.perf_counter()
    correlar = correlador_por_bloques(threshold, max_lag)
    if len(senales) == etiqueta.n_M:
        asociacion = associate_enhanced(senales, etiqueta.n_S, etiqueta.n_M, etiqueta.n_P, correlar)
    elif senales:
        logger.warning("MUSIC devolvió %d de %d direcciones; asociación voraz.", len(senales), etiqueta.n_M)
        asociacion = associate_greedy(senales, correlar)
    else:
        asociacion = None
    tiempos['asociacion'] = time.perf_counter() - inicio

    return PipelineReport(
        label=etiqueta,
        bloques_suavizado=B,
        doas=tuple(estimacion.direcciones),
        partition=asociacion.partition if asociacion else (),
        correlation_count=asociacion.correlation_count if asociacion else 0,
        corta=estimacion.corta,
        tiempos=tiempos,
        espectro=espectro,
    )
