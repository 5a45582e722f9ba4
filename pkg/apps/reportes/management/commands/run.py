import numpy as np
from django.conf import settings
from rest_framework import serializers

from apps.canal.escenarios import sample_scenario, synthesize_blocks
from apps.canal.serializers import ScenarioConfigSerializer
from apps.doa.music import GridSpec, exportar_espectro
from apps.predicciones.checkpoint import load_checkpoint
from apps.reportes.comandos import ComandoDoA, escribir_json, leer_config, validar_config
from apps.reportes.evaluacion import error_doa, particion_correcta
from apps.reportes.pipeline import EstimadorMDL, EstimadorOraculo, EstimadorRed, run_pipeline


class Command(ComandoDoA):
    help = "Ejecuta el flujo completo sobre una escena simulada."
    accion = 'run'

    def agregar_argumentos(self, parser):
        parser.add_argument('--class', dest='clase', type=int, default=None, help="Clase forzada (1..19)")
        parser.add_argument('--moe', choices=['oracle', 'mdl', 'model'], default='oracle')
        parser.add_argument('--checkpoint', default=None)
        parser.add_argument('--blocks', type=int, default=11)
        parser.add_argument('--spectrum', action='store_true', help="Exporta el espectro MUSIC")

    def _estimador(self, opciones, escenario):
        if opciones['moe'] == 'oracle':
            return EstimadorOraculo(escenario.label)
        if opciones['moe'] == 'mdl':
            return EstimadorMDL()
        if not opciones['checkpoint']:
            raise serializers.ValidationError({'checkpoint': "El modo 'model' necesita --checkpoint."})
        return EstimadorRed(load_checkpoint(opciones['checkpoint'])[0])

    def ejecutar(self, **opciones):
        config, = validar_config(leer_config(opciones['config']), ScenarioConfigSerializer)
        nombre, geom = self.geometria(opciones)
        rng = np.random.default_rng(opciones['seed'])
        escenario = sample_scenario(rng, config, forced_class18=opciones['clase'])
        bloques = synthesize_blocks(escenario, geom, opciones['blocks'], rng)

        paso = settings.DOA['PASO_GRILLA']
        reporte = run_pipeline(
            bloques, geom, self._estimador(opciones, escenario), GridSpec(paso, paso),
            threshold=settings.DOA['UMBRAL_CORRELACION'], max_lag=settings.DOA['RETARDO_MAXIMO'],
            conservar_espectro=opciones['spectrum'],
        )

        salida = self.directorio_salida(opciones)
        resumen = {
            'array': nombre,
            'truth': {
                'class18': escenario.label.class18,
                'label': [escenario.label.n_S, escenario.label.n_M, escenario.label.n_P],
                'snr_db': round(escenario.los_snr, 4),
                'doas_deg': [[round(v, 4) for v in d.grados()] for d in escenario.direcciones()],
            },
            'estimate': reporte.como_dict(),
        }
        if not reporte.sobrecargada and not escenario.label.sobrecargada:
            plegar = geom.simetria_especular
            resumen['doa_error_deg'] = round(float(np.degrees(
                error_doa(reporte.doas, escenario.direcciones(), plegar))), 6)
            resumen['partition_correct'] = particion_correcta(reporte, escenario, plegar)
        if reporte.espectro is not None:
            exportar_espectro(reporte.espectro, salida / 'spectrum.txt')
        ruta = escribir_json(salida / 'run_report.json', resumen)
        return {'objeto': ruta, 'resumen': resumen, 'tiempos': reporte.tiempos}
