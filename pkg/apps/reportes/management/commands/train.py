import dataclasses
import logging

import numpy as np

from apps.canal.dataset import features_and_labels, read_dataset
from apps.canal.etiquetas import CLASE_SOBRECARGADA
from apps.predicciones.checkpoint import save_checkpoint
from apps.predicciones.entrenamiento import train
from apps.predicciones.perdidas import ESTANDAR, PONDERADA
from apps.predicciones.red import construir
from apps.predicciones.serializers import TrainConfigSerializer
from apps.reportes.comandos import TAREAS_CLI, ComandoDoA, escribir_csv, leer_config, validar_config

logger = logging.getLogger(__name__)

PERDIDAS_CLI = {'ce': ESTANDAR, 'weighted': PONDERADA}


class Command(ComandoDoA):
    help = "Entrena la red de orden de modelo (RCNN o MLP) sobre un dataset."
    accion = 'train'

    def agregar_argumentos(self, parser):
        parser.add_argument('--dataset', required=True)
        parser.add_argument('--task', type=int, choices=sorted(TAREAS_CLI), default=18,
                            help="19 entrena con la clase sobrecargada; 5 y 9 se agrupan al evaluar")
        parser.add_argument('--loss', choices=sorted(PERDIDAS_CLI), default=None)
        parser.add_argument('--arch', choices=['rcnn', 'mlp'], default='rcnn')

    def ejecutar(self, **opciones):
        datos = leer_config(opciones['config'])
        if opciones['loss']:
            datos['loss'] = PERDIDAS_CLI[opciones['loss']]
        config, = validar_config(datos, TrainConfigSerializer)
        # --seed fija a la vez la inicialización, el barajado y el dropout.
        config = dataclasses.replace(config, seed=opciones['seed'])

        meta, registros = read_dataset(opciones['dataset'])
        caracteristicas, etiquetas = features_and_labels(meta, registros)
        num_classes = 19 if opciones['task'] == 19 else 18
        if num_classes == 18:
            validas = etiquetas != CLASE_SOBRECARGADA
            if not np.all(validas):
                logger.warning("Se descartan %d registros sobrecargados para 18 clases.", int(np.sum(~validas)))
            caracteristicas, etiquetas = caracteristicas[validas], etiquetas[validas]

        red = construir(opciones['arch'], num_classes, meta['E'], semilla=config.seed)
        reporte = train(red, caracteristicas, etiquetas, config)

        salida = self.directorio_salida(opciones)
        ruta = salida / 'checkpoint.ckpt'
        save_checkpoint(ruta, red, reporte.optimizador, extra={
            'array': meta['array'], 'task': opciones['task'], 'loss': config.loss_spec.kind,
        })
        escribir_csv(salida / 'train_history.csv', ['epoch', 'loss', 'train_accuracy', 'validation_accuracy'], [
            [f['epoch'], f"{f['loss']:.6f}", f"{f['train_accuracy']:.6f}",
             '' if f['validation_accuracy'] is None else f"{f['validation_accuracy']:.6f}"]
            for f in reporte.epocas
        ])
        final = reporte.final
        return {
            'objeto': ruta,
            'resumen': {
                'arch': opciones['arch'], 'num_classes': num_classes, 'parameters': red.count_parameters(),
                'loss': config.loss_spec.kind, 'epochs': config.epochs, 'train_count': reporte.entrenamiento,
                'final_loss': final['loss'], 'validation_accuracy': final['validation_accuracy'],
            },
        }
