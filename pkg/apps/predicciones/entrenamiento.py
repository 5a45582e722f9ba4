"""Bucle de entrenamiento con Adam y evaluación por época."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config.exceptions import EntradaVaciaError, EntrenamientoFallidoError, FueraDeRangoError
from .optimizadores import Adam
from .perdidas import LossSpec, perdida
from .red import predict

logger = logging.getLogger(__name__)

LOTE_EVALUACION = 512


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    batch: int = 64
    epochs: int = 10
    seed: int = 0
    loss_spec: LossSpec = field(default_factory=LossSpec)
    validation_fraction: float = 0.1

    def __post_init__(self):
        if self.lr < 0:
            raise FueraDeRangoError("lr no puede ser negativo.")
        if self.batch < 1 or self.epochs < 1:
            raise FueraDeRangoError("batch y epochs deben ser >= 1.")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise FueraDeRangoError("validation_fraction debe estar en [0, 1).")


@dataclass
class TrainingReport:
    epocas: list = field(default_factory=list)
    entrenamiento: int = 0
    validacion: int = 0
    optimizador: Adam = None

    @property
    def final(self):
        return self.epocas[-1] if self.epocas else None

    def como_dict(self):
        return {'train_count': self.entrenamiento, 'validation_count': self.validacion, 'epochs': self.epocas}


def accuracy(red, caracteristicas, etiquetas):
    if len(etiquetas) == 0:
        return None
    aciertos = 0
    for inicio in range(0, len(etiquetas), LOTE_EVALUACION):
        clases, _ = predict(red, caracteristicas[inicio:inicio + LOTE_EVALUACION])
        aciertos += int(np.sum(clases == etiquetas[inicio:inicio + LOTE_EVALUACION]))
    return aciertos / len(etiquetas)


def _particion(n, fraccion, rng):
    orden = rng.permutation(n)
    n_val = int(round(n * fraccion))
    if n_val >= n:
        n_val = n - 1
    return orden[n_val:], orden[:n_val]


def train(red, caracteristicas, etiquetas, config):
    """
    Entrena `red` in situ. Determinista para una misma semilla.

    Devuelve un TrainingReport con, por época, la pérdida media y la
    precisión de entrenamiento y validación (modo inferencia).
    """
    caracteristicas = np.asarray(caracteristicas)
    etiquetas = np.asarray(etiquetas, dtype=np.int64)
    if len(etiquetas) == 0:
        raise EntradaVaciaError("El dataset de entrenamiento está vacío.")
    if np.any(etiquetas < 1) or np.any(etiquetas > red.num_classes):
        raise FueraDeRangoError(f"Etiquetas fuera de 1..{red.num_classes}.")

    rng = np.random.default_rng(config.seed)
    red.reseed(config.seed)
    indices_ent, indices_val = _particion(len(etiquetas), config.validation_fraction, rng)
    optimizador = Adam(lr=config.lr)
    reporte = TrainingReport(entrenamiento=len(indices_ent), validacion=len(indices_val), optimizador=optimizador)
    logger.info("Entrenando %s: %d muestras, %d de validación, %d épocas",
                red.arquitectura, len(indices_ent), len(indices_val), config.epochs)

    for epoca in range(1, config.epochs + 1):
        orden = rng.permutation(indices_ent)
        perdidas = []
        for inicio in range(0, len(orden), config.batch):
            lote = orden[inicio:inicio + config.batch]
            logits = red.forward(caracteristicas[lote], entrenamiento=True)
            valor, gradiente = perdida(logits, etiquetas[lote], config.loss_spec)
            if not math.isfinite(valor):
                raise EntrenamientoFallidoError(epoca)
            red.backward(gradiente)
            optimizador.step(red.parametros())
            perdidas.append(valor * len(lote))

        fila = {
            'epoch': epoca,
            'loss': float(np.sum(perdidas) / len(orden)),
            'train_accuracy': accuracy(red, caracteristicas[indices_ent], etiquetas[indices_ent]),
            'validation_accuracy': accuracy(red, caracteristicas[indices_val], etiquetas[indices_val]),
        }
        reporte.epocas.append(fila)
        logger.info("Época %d: loss=%.4f train=%.3f val=%s", epoca, fila['loss'], fila['train_accuracy'],
                    'n/a' if fila['validation_accuracy'] is None else f"{fila['validation_accuracy']:.3f}")

    return reporte
