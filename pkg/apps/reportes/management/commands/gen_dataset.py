from apps.canal.dataset import generate_dataset
from apps.canal.serializers import ScenarioConfigSerializer
from apps.reportes.comandos import ComandoDoA, escribir_json, leer_config, validar_config


class Command(ComandoDoA):
    help = "Genera un dataset determinista de escenas (características de covarianza y etiquetas)."
    accion = 'gen_dataset'

    def agregar_argumentos(self, parser):
        parser.add_argument('--count', type=int, default=1000, help="Número de registros")

    def ejecutar(self, **opciones):
        config, = validar_config(leer_config(opciones['config']), ScenarioConfigSerializer)
        nombre, geom = self.geometria(opciones)
        salida = self.directorio_salida(opciones)
        ruta = salida / 'dataset.bin'
        resumen = generate_dataset(config, opciones['count'], opciones['seed'], ruta, geom, nombre_arreglo=nombre)
        escribir_json(salida / 'dataset.json', {
            'array': nombre, 'seed': opciones['seed'], 'config': config.echo(), **resumen, 'path': ruta.name,
        })
        return {
            'objeto': ruta,
            'resumen': {'count': resumen['count'], 'class_counts': resumen['class_counts'], 'array': nombre,
                        'config': config.echo()},
        }
