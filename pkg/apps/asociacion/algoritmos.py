"""
Asociación de señales a fuentes.

Ambos algoritmos recorren los conjuntos C_i en orden y comparan cada señal
pendiente con el primer elemento del conjunto; un conjunto vacío acepta la
primera señal pendiente sin correlar. El mejorado solo abre n_S conjuntos y
cierra cada uno al llegar a n_P elementos.
"""
import logging
from dataclasses import dataclass, field

from apps.canal.etiquetas import TABLA_ETIQUETAS
from config.exceptions import EntradaVaciaError, EtiquetaInconsistenteError
from .filtrado import correlated

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssociationResult:
    partition: tuple
    correlation_count: int
    coeficientes: dict = field(default_factory=dict)

    def fuente_de(self, indice):
        for k, conjunto in enumerate(self.partition):
            if indice in conjunto:
                return k
        raise KeyError(indice)


class _Contador:
    def __init__(self, signals, correlate):
        self.signals = signals
        self.correlate = correlate or (lambda a, b: correlated(a, b))
        self.llamadas = 0
        self.coeficientes = {}

    def __call__(self, candidato, representante):
        self.llamadas += 1
        ok, coeficiente = self.correlate(self.signals[candidato], self.signals[representante])
        self.coeficientes[(candidato, representante)] = coeficiente
        return ok


def _llenar(conjunto, pendientes, cor, limite=None):
    for j in list(pendientes):
        if not conjunto or cor(j, conjunto[0]):
            conjunto.append(j)
            pendientes.remove(j)
        if limite is not None and len(conjunto) == limite:
            break


def associate_greedy(signals, correlate=None):
    """`correlate(s_candidato, s_representante) -> (bool, coeficiente)`; por defecto `correlated`."""
    signals = list(signals)
    if not signals:
        raise EntradaVaciaError("No hay señales que asociar.")
    cor = _Contador(signals, correlate)
    pendientes = list(range(len(signals)))
    conjuntos = []
    for _ in range(len(signals)):
        conjunto = []
        _llenar(conjunto, pendientes, cor)
        if conjunto:
            conjuntos.append(tuple(conjunto))
    return AssociationResult(tuple(conjuntos), cor.llamadas, cor.coeficientes)


def associate_enhanced(signals, n_S, n_M, n_P, correlate=None, assign_remaining=True):
    """
    Con `assign_remaining` el último conjunto recibe las señales pendientes sin
    correlar; sin él se sigue el recorrido completo también en el último.
    """
    signals = list(signals)
    if (n_S, n_M, n_P) not in {fila[:3] for fila in TABLA_ETIQUETAS.values()}:
        raise EtiquetaInconsistenteError(f"({n_S}, {n_M}, {n_P}) no es una tupla de etiqueta válida.")
    if len(signals) != n_M:
        raise EtiquetaInconsistenteError(f"Se recibieron {len(signals)} señales para n_M={n_M}.")

    cor = _Contador(signals, correlate)
    pendientes = list(range(n_M))
    conjuntos = []
    for i in range(n_S):
        conjunto = []
        if assign_remaining and i == n_S - 1:
            conjunto.extend(pendientes)
            pendientes.clear()
        else:
            _llenar(conjunto, pendientes, cor, limite=n_P)
        if conjunto:
            conjuntos.append(tuple(conjunto))

    if pendientes:
        logger.warning("%d señales sin conjunto tras la asociación; se dejan aisladas.", len(pendientes))
        conjuntos.extend((j,) for j in pendientes)
    return AssociationResult(tuple(conjuntos), cor.llamadas, cor.coeficientes)
