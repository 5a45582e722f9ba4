from rest_framework import serializers

from apps.canal.dataset import read_dataset
from apps.predicciones.checkpoint import load_checkpoint
from apps.reportes.comandos import TAREAS_CLI, ComandoDoA, escribir_csv, escribir_json
from apps.reportes.evaluacion import eval_confusion, predictor_mdl


def _celda(valor):
    return '' if valor is None else f"{valor:.6f}"


class Command(ComandoDoA):
    help = "Matriz de confusión, exactitud por SNR y por campo de visión de un clasificador de orden."
    accion = 'eval_moe'

    def agregar_argumentos(self, parser):
        parser.add_argument('--dataset', required=True)
        parser.add_argument('--checkpoint', default=None)
        parser.add_argument('--mdl', action='store_true', help="Evalúa MDL en lugar de una red")
        parser.add_argument('--task', type=int, choices=sorted(TAREAS_CLI), default=18)

    def ejecutar(self, **opciones):
        if bool(opciones['checkpoint']) == bool(opciones['mdl']):
            raise serializers.ValidationError({'checkpoint': "Indique exactamente uno de --checkpoint o --mdl."})
        meta, registros = read_dataset(opciones['dataset'])
        modelo = predictor_mdl(meta) if opciones['mdl'] else load_checkpoint(opciones['checkpoint'])[0]
        tarea = TAREAS_CLI[opciones['task']]
        reporte = eval_confusion((meta, registros), modelo, tarea, sobrecarga=opciones['task'] == 19)

        salida = self.directorio_salida(opciones)
        ruta = escribir_csv(
            salida / f"confusion_{opciones['task']}.csv",
            ['true\\pred'] + [str(c + 1) for c in range(reporte.confusion.shape[1])],
            [[str(f + 1)] + fila.tolist() for f, fila in enumerate(reporte.confusion)],
        )
        escribir_csv(salida / 'accuracy_vs_snr.csv', ['snr_lo', 'snr_hi', 'count', 'accuracy'],
                     [[b['lo'], b['hi'], b['count'], _celda(b['accuracy'])] for b in reporte.por_snr])
        escribir_csv(salida / 'accuracy_fov.csv', ['axis', 'lo_deg', 'hi_deg', 'count', 'accuracy'],
                     [[b['eje'], b['lo'], b['hi'], b['count'], _celda(b['accuracy'])] for b in reporte.por_fov])
        escribir_json(salida / 'eval_moe.json', reporte.resumen())
        return {'objeto': ruta, 'resumen': reporte.resumen()}
