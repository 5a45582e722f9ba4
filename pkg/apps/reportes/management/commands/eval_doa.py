import dataclasses

import numpy as np
from django.conf import settings

from apps.canal.dataset import semilla_registro
from apps.canal.escenarios import sample_scenario, synthesize_blocks
from apps.canal.serializers import ScenarioConfigSerializer
from apps.doa.music import GridSpec
from apps.predicciones.checkpoint import load_checkpoint
from apps.reportes.comandos import ComandoDoA, escribir_csv, escribir_json, leer_config, validar_config
from apps.reportes.evaluacion import MODOS_MOE, eval_doa_cdf

BLOQUES_POR_ESCENA = 11
SNR_POR_DEFECTO = (0.0, 10.0)


def escenas(config, geom, cantidad, semilla):
    """Escenas independientes con semilla propia; 11 bloques alcanzan para cualquier n_P ≤ 5."""
    for k in range(cantidad):
        rng = np.random.default_rng(semilla_registro(semilla, k))
        escenario = sample_scenario(rng, config)
        yield escenario, synthesize_blocks(escenario, geom, BLOQUES_POR_ESCENA, rng)


class Command(ComandoDoA):
    help = "CDF del error de DoA del flujo completo con distintas fuentes de orden de modelo."
    accion = 'eval_doa'

    def agregar_argumentos(self, parser):
        parser.add_argument('--moe', choices=MODOS_MOE, default='oracle')
        parser.add_argument('--checkpoint', default=None)
        parser.add_argument('--scenarios', type=int, default=200)
        parser.add_argument('--snr-range', default=None, help="Rango 'a,b' en dB (por defecto 0,10)")
        parser.add_argument('--grid-step', type=float, default=None)
        parser.add_argument('--workers', type=int, default=1)

    def ejecutar(self, **opciones):
        datos = leer_config(opciones['config'])
        if opciones['snr_range']:
            datos['snr_range'] = opciones['snr_range']
        config, = validar_config(datos, ScenarioConfigSerializer)
        if 'snr_range' not in datos:
            config = dataclasses.replace(config, snr_range=SNR_POR_DEFECTO)

        nombre, geom = self.geometria(opciones)
        paso = opciones['grid_step'] or settings.DOA['PASO_GRILLA']
        red = load_checkpoint(opciones['checkpoint'])[0] if opciones['checkpoint'] else None
        resultado = eval_doa_cdf(
            escenas(config, geom, opciones['scenarios'], opciones['seed']), opciones['moe'], geom,
            red=red, grid=GridSpec(paso, paso), workers=opciones['workers'],
            threshold=settings.DOA['UMBRAL_CORRELACION'], max_lag=settings.DOA['RETARDO_MAXIMO'],
        )

        salida = self.directorio_salida(opciones)
        ruta = escribir_csv(salida / f"doa_cdf_{opciones['moe']}.csv", ['quantile', 'error_deg'],
                            [[q, f"{v:.6f}"] for q, v in resultado['quantiles'].items()])
        resumen = {
            'array': nombre, 'mode': resultado['mode'], 'count': resultado['count'],
            'snr_range': list(config.snr_range),
            'quantiles': {str(q): round(v, 6) for q, v in resultado['quantiles'].items()},
            'partition_accuracy': round(resultado['partition_accuracy'], 6),
        }
        escribir_json(salida / f"eval_doa_{opciones['moe']}.json", resumen)
        return {'objeto': ruta, 'resumen': resumen}
