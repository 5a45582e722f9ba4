from apps.canal.dataset import read_dataset
from apps.reportes.comandos import ComandoDoA, escribir_csv, escribir_json
from apps.reportes.evaluacion import eval_baseline


class Command(ComandoDoA):
    help = "Exactitud de n_M de AIC y MDL sobre un dataset."
    accion = 'baseline'

    def agregar_argumentos(self, parser):
        parser.add_argument('--dataset', required=True)

    def ejecutar(self, **opciones):
        meta, registros = read_dataset(opciones['dataset'])
        resultado = eval_baseline((meta, registros))
        salida = self.directorio_salida(opciones)
        for nombre, datos in resultado.items():
            escribir_csv(salida / f"baseline_{nombre}_confusion.csv",
                         ['true_n_m\\est'] + [str(c) for c in range(datos['confusion'].shape[1])],
                         [[str(f + 1)] + fila.tolist() for f, fila in enumerate(datos['confusion'])])
        resumen = {'count': int(len(registros)),
                   **{f"{nombre}_accuracy": round(datos['accuracy'], 6) for nombre, datos in resultado.items()},
                   **{f"{nombre}_clipped": int(datos['recortes']) for nombre, datos in resultado.items()}}
        ruta = escribir_json(salida / 'baseline.json', resumen)
        return {'objeto': ruta, 'resumen': resumen}
