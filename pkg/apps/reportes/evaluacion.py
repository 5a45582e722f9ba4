"""
Evaluaciones: matrices de confusión de MOE, CDF del error de DoA, conteos
de correlación de la asociación y la línea base AIC/MDL.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from apps.arreglos.geometria import distancia_angular
from apps.asociacion.algoritmos import associate_enhanced, associate_greedy
from apps.asociacion.filtrado import RETARDO_MAXIMO, UMBRAL_CORRELACION
from apps.canal.etiquetas import CLASE_SOBRECARGADA, TABLA_ETIQUETAS, TAREAS, coarsen_label, trayectos_por_fuente
from apps.covarianza.estimacion import from_feature
from apps.orden.criterios import estimar_orden
from apps.predicciones.red import predict
from config.exceptions import EntradaVaciaError, FueraDeRangoError
from .pipeline import EstimadorMDL, EstimadorOraculo, EstimadorRed, run_pipeline

logger = logging.getLogger(__name__)

CUANTILES = (0.5, 0.75, 0.9, 0.95)
BORDES_SNR = tuple(range(-10, 12, 2))
ANCHO_FOV = 30
LOTE_PREDICCION = 512
MODOS_MOE = ('oracle', 'mdl', 'model', 'model_weighted')


# --- Clasificación de orden ---

@dataclass
class EvalReport:
    task: str
    confusion: np.ndarray
    accuracy: float
    por_snr: list = field(default_factory=list)
    por_fov: list = field(default_factory=list)
    tasas: dict = field(default_factory=dict)

    def resumen(self):
        return {'task': self.task, 'accuracy': round(self.accuracy, 6), 'total': int(self.confusion.sum()),
                'rates': {k: round(v, 6) for k, v in self.tasas.items()}}


def _predecir(model, caracteristicas):
    """Acepta una red (se usa `predict` por lotes) o un invocable características → clases."""
    if not hasattr(model, 'forward'):
        return np.asarray(model(caracteristicas), dtype=np.int64)
    clases = [predict(model, caracteristicas[i:i + LOTE_PREDICCION])[0]
              for i in range(0, len(caracteristicas), LOTE_PREDICCION)]
    return np.concatenate(clases).astype(np.int64)


def predictor_mdl(meta):
    """Predictor de clase basado en MDL para comparar con la red sobre el mismo dataset."""
    estimador = EstimadorMDL()

    def predecir(caracteristicas):
        return [estimador(from_feature(f, meta['N'])).class18 for f in caracteristicas]
    return predecir


def _orden(clase):
    return TABLA_ETIQUETAS[int(clase)][1:3]


def tasas_de_orden(reales, estimadas):
    """Tasas de sub y sobreestimación de n_M y n_P; se excluyen los pares con la clase sobrecargada."""
    pares = [(r, e) for r, e in zip(reales, estimadas) if CLASE_SOBRECARGADA not in (r, e)]
    if not pares:
        return {'n_m_under': 0.0, 'n_m_over': 0.0, 'n_p_under': 0.0, 'n_p_over': 0.0}
    r = np.array([_orden(c) for c, _ in pares])
    e = np.array([_orden(c) for _, c in pares])
    return {
        'n_m_under': float(np.mean(e[:, 0] < r[:, 0])),
        'n_m_over': float(np.mean(e[:, 0] > r[:, 0])),
        'n_p_under': float(np.mean(e[:, 1] < r[:, 1])),
        'n_p_over': float(np.mean(e[:, 1] > r[:, 1])),
    }


def _exactitud_por_bin(valores, aciertos, bordes):
    filas = []
    for lo, hi in zip(bordes[:-1], bordes[1:]):
        dentro = (valores >= lo) & (valores < hi)
        n = int(dentro.sum())
        filas.append({'lo': lo, 'hi': hi, 'count': n, 'accuracy': float(aciertos[dentro].mean()) if n else None})
    return filas


def eval_confusion(dataset, model, task, sobrecarga=False, bordes_snr=BORDES_SNR):
    """
    `dataset` es el par (metadatos, registros) de `read_dataset`. Las
    predicciones de 18 (o 19) clases se agrupan con `coarsen_label` antes de
    contar; filas = clase real, columnas = clase estimada.
    """
    if task not in TAREAS:
        raise FueraDeRangoError(f"Tarea desconocida: {task}")
    meta, registros = dataset
    if len(registros) == 0:
        raise EntradaVaciaError("El dataset no tiene registros.")
    E = meta['E']
    caracteristicas = registros['feature'].reshape(-1, E, E, 2)
    reales = registros['class18'].astype(np.int64)
    estimadas = _predecir(model, caracteristicas)

    sobrecarga = sobrecarga or bool(np.any(reales == CLASE_SOBRECARGADA) or np.any(estimadas == CLASE_SOBRECARGADA))
    tamano = TAREAS[task] + int(sobrecarga)
    r = np.array([coarsen_label(c, task) for c in reales]) - 1
    e = np.array([coarsen_label(c, task) for c in estimadas]) - 1
    confusion = np.zeros((tamano, tamano), dtype=np.int64)
    np.add.at(confusion, (r, e), 1)
    aciertos = (r == e).astype(float)

    los = registros['doas'][:, 0, :].astype(float)
    por_fov = (
        [dict(eje='elevation', **f) for f in
         _exactitud_por_bin(np.degrees(los[:, 0]), aciertos, list(range(0, 180 + ANCHO_FOV, ANCHO_FOV)))]
        + [dict(eje='azimuth', **f) for f in
           _exactitud_por_bin(np.degrees(los[:, 1]), aciertos, list(range(0, 360 + ANCHO_FOV, ANCHO_FOV)))]
    )
    reporte = EvalReport(
        task=task,
        confusion=confusion,
        accuracy=float(np.trace(confusion) / confusion.sum()),
        por_snr=_exactitud_por_bin(registros['snr'].astype(float), aciertos, list(bordes_snr)),
        por_fov=por_fov,
        tasas=tasas_de_orden(reales.tolist(), estimadas.tolist()),
    )
    logger.info("Exactitud %s: %.4f sobre %d registros", task, reporte.accuracy, len(reales))
    return reporte


# --- Error de DoA ---

def emparejar_doas(estimadas, verdaderas, plegar=False):
    """
    Emparejamiento voraz por distancia de gran círculo: se toma el par más
    cercano, se retiran ambos y se repite. Devuelve [(i_est, j_real, dist)].
    """
    if plegar:
        estimadas = [d.plegada() for d in estimadas]
        verdaderas = [d.plegada() for d in verdaderas]
    pares = sorted(
        (distancia_angular(a, b), i, j)
        for i, a in enumerate(estimadas) for j, b in enumerate(verdaderas)
    )
    usados_i, usados_j, resultado = set(), set(), []
    for dist, i, j in pares:
        if i in usados_i or j in usados_j:
            continue
        usados_i.add(i)
        usados_j.add(j)
        resultado.append((i, j, dist))
    return resultado


def error_doa(estimadas, verdaderas, plegar=False):
    """Media sobre los trayectos reales; un trayecto sin estimación cuenta π."""
    if not verdaderas:
        raise EntradaVaciaError("No hay direcciones reales.")
    pares = emparejar_doas(estimadas, verdaderas, plegar)
    errores = [p[2] for p in pares] + [math.pi] * (len(verdaderas) - len(pares))
    return float(np.mean(errores))


def particion_correcta(reporte, escenario, plegar=False):
    """La partición estimada coincide con las fuentes reales de las direcciones emparejadas."""
    if len(reporte.doas) != escenario.label.n_M:
        return False
    fuente = escenario.fuente_de_trayecto()
    pares = emparejar_doas(reporte.doas, escenario.direcciones(), plegar)
    fuente_de_estimada = {i: fuente[j] for i, j, _ in pares}
    grupos = {}
    for i, f in fuente_de_estimada.items():
        grupos.setdefault(f, set()).add(i)
    return {frozenset(g) for g in grupos.values()} == {frozenset(c) for c in reporte.partition}


def _estimador(modo, escenario, red):
    if modo == 'oracle':
        return EstimadorOraculo(escenario.label)
    if modo == 'mdl':
        return EstimadorMDL()
    if red is None:
        raise FueraDeRangoError(f"El modo '{modo}' necesita una red entrenada.")
    return EstimadorRed(red)


def eval_doa_cdf(escenarios, moe_mode, geom, red=None, grid=None, cuantiles=CUANTILES, workers=1,
                 threshold=UMBRAL_CORRELACION, max_lag=RETARDO_MAXIMO):
    """
    `escenarios` es una secuencia de (Scenario, bloques). Las escenas
    sobrecargadas se omiten; una escena estimada como sobrecargada cuenta π.
    Los resultados se agregan en el orden de las escenas.
    """
    if moe_mode not in MODOS_MOE:
        raise FueraDeRangoError(f"Modo de MOE desconocido: {moe_mode}")
    escenarios = [(e, b) for e, b in escenarios if not e.label.sobrecargada]
    if not escenarios:
        raise EntradaVaciaError("No hay escenas evaluables.")
    plegar = geom.simetria_especular
    if red is not None and workers > 1:
        logger.info("La red no admite llamadas concurrentes; se evalúa con un solo hilo.")
        workers = 1

    def evaluar(par):
        escenario, bloques = par
        reporte = run_pipeline(bloques, geom, _estimador(moe_mode, escenario, red), grid, threshold, max_lag)
        if reporte.sobrecargada:
            return math.pi, False
        return error_doa(reporte.doas, escenario.direcciones(), plegar), particion_correcta(reporte, escenario, plegar)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ejecutor:
            resultados = list(ejecutor.map(evaluar, escenarios))
    else:
        resultados = [evaluar(par) for par in escenarios]

    errores = np.degrees([r[0] for r in resultados])
    return {
        'mode': moe_mode,
        'count': len(resultados),
        'quantiles': {q: float(np.quantile(errores, q)) for q in cuantiles},
        'partition_accuracy': float(np.mean([r[1] for r in resultados])),
        'errors_deg': errores,
    }


# --- Conteo de correlaciones ---

def _oraculo(a, b):
    return a == b, float(a == b)


def _fuentes(clase):
    return [s for s, k in enumerate(trayectos_por_fuente(clase)) for _ in range(k)]


def eval_association_counts(classes=None, trials=1000, seed=0, assign_remaining=True, exhaustivo=True):
    """
    Conteo medio de correlaciones por n_M con un correlador perfecto: por
    Monte Carlo (clase uniforme dentro de cada n_M, orden aleatorio) y, si se
    pide, por barrido exhaustivo de permutaciones promediado por clase.
    """
    clases = tuple(classes or TABLA_ETIQUETAS)
    if trials < 1:
        raise FueraDeRangoError("trials debe ser >= 1.")
    rng = np.random.default_rng(seed)
    por_n_m = {}
    for clase in clases:
        por_n_m.setdefault(TABLA_ETIQUETAS[clase][1], []).append(clase)

    tabla = {}
    for n_M in sorted(por_n_m):
        voraz, mejorado = [], []
        for _ in range(trials):
            clase = por_n_m[n_M][rng.integers(len(por_n_m[n_M]))]
            n_S, _, n_P = TABLA_ETIQUETAS[clase][:3]
            orden = list(rng.permutation(_fuentes(clase)))
            voraz.append(associate_greedy(orden, _oraculo).correlation_count)
            mejorado.append(associate_enhanced(orden, n_S, n_M, n_P, _oraculo,
                                               assign_remaining=assign_remaining).correlation_count)
        fila = {'greedy': float(np.mean(voraz)), 'enhanced': float(np.mean(mejorado)),
                'greedy_worst': int(np.max(voraz))}
        if exhaustivo:
            fila.update(_exhaustivo(por_n_m[n_M], assign_remaining))
        tabla[n_M] = fila
    return tabla


def _exhaustivo(clases, assign_remaining):
    voraz, mejorado = [], []
    for clase in clases:
        n_S, n_M, n_P = TABLA_ETIQUETAS[clase][:3]
        ordenes = list(itertools.permutations(_fuentes(clase)))
        voraz.append(np.mean([associate_greedy(o, _oraculo).correlation_count for o in ordenes]))
        mejorado.append(np.mean([
            associate_enhanced(o, n_S, n_M, n_P, _oraculo, assign_remaining=assign_remaining).correlation_count
            for o in ordenes
        ]))
    return {'greedy_exhaustive': float(np.mean(voraz)), 'enhanced_exhaustive': float(np.mean(mejorado))}


# --- Línea base clásica ---

def eval_baseline(dataset):
    """Exactitud de n_M de AIC y MDL, su confusión (filas n_M real 1..8, columnas
    estimación 0..E-1) y cuántas estimaciones recortaron autovalores de ruido."""
    meta, registros = dataset
    if len(registros) == 0:
        raise EntradaVaciaError("El dataset no tiene registros.")
    E, N = meta['E'], meta['N']
    reales = registros['n_m'].astype(np.int64)
    resultado = {}
    for nombre in ('aic', 'mdl'):
        estimaciones = [estimar_orden(from_feature(f.reshape(E, E, 2), N), N, nombre) for f in registros['feature']]
        estimadas = np.array([e.orden for e in estimaciones])
        confusion = np.zeros((8, E), dtype=np.int64)
        np.add.at(confusion, (reales - 1, estimadas), 1)
        resultado[nombre] = {
            'accuracy': float(np.mean(estimadas == reales)),
            'confusion': confusion,
            'recortes': sum(e.recortada for e in estimaciones),
        }
        logger.info("Línea base %s: exactitud de n_M %.4f", nombre, resultado[nombre]['accuracy'])
    return resultado
