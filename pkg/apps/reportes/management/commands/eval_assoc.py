from apps.reportes.comandos import ComandoDoA, escribir_csv, escribir_json
from apps.reportes.evaluacion import eval_association_counts

COLUMNAS = ['greedy', 'enhanced', 'greedy_worst', 'greedy_exhaustive', 'enhanced_exhaustive']


class Command(ComandoDoA):
    help = "Conteo medio de correlaciones por n_M de las asociaciones voraz y mejorada."
    accion = 'eval_assoc'

    def agregar_argumentos(self, parser):
        parser.add_argument('--trials', type=int, default=1000)
        parser.add_argument('--literal', action='store_true',
                            help="El último conjunto también se recorre con correlaciones")

    def ejecutar(self, **opciones):
        tabla = eval_association_counts(trials=opciones['trials'], seed=opciones['seed'],
                                        assign_remaining=not opciones['literal'])
        salida = self.directorio_salida(opciones)
        ruta = escribir_csv(salida / 'association_counts.csv', ['n_m'] + COLUMNAS, [
            [n_M] + [f"{fila[c]:.6f}" if isinstance(fila[c], float) else fila[c] for c in COLUMNAS]
            for n_M, fila in tabla.items()
        ])
        resumen = {'trials': opciones['trials'], 'literal': opciones['literal'],
                   'table': {str(n): {k: round(v, 6) for k, v in fila.items()} for n, fila in tabla.items()}}
        escribir_json(salida / 'eval_assoc.json', resumen)
        return {'objeto': ruta, 'resumen': resumen}
