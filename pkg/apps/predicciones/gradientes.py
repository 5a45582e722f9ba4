"""
Verificación de gradientes por diferencias centradas.

Funciona con cualquier capa o con una `Red`: ambas exponen
forward/backward/parametros/to_dtype/reseed. Todo se evalúa en float64 y el
generador de dropout se refija antes de cada forward para que el objetivo
sea una función determinista de los parámetros.
"""
import numpy as np

from .capas import Capa

PISO = 1e-12


def _norma_relativa(analitico, numerico):
    denominador = np.linalg.norm(analitico) + np.linalg.norm(numerico)
    if denominador < PISO:
        return 0.0
    return float(np.linalg.norm(analitico - numerico) / denominador)


def _indices(forma, max_entradas, rng):
    total = int(np.prod(forma))
    if max_entradas is None or total <= max_entradas:
        return range(total)
    return rng.choice(total, size=max_entradas, replace=False)


def gradient_check(modulo, entrada, eps=1e-3, semilla=0, entrenamiento=True, max_entradas=None):
    """
    Error relativo ‖a − n‖ / (‖a‖ + ‖n‖) por tensor de parámetros y para la entrada.

    El objetivo escalar es Σ R·salida con R aleatorio fijo.
    """
    modulo.to_dtype(np.float64)
    x = np.array(entrada, dtype=np.float64)
    rng = np.random.default_rng(semilla)

    def salida(valor_x):
        modulo.reseed(semilla)
        return modulo.forward(valor_x, entrenamiento)

    proyeccion = rng.standard_normal(salida(x).shape)

    def objetivo(valor_x):
        return float(np.sum(proyeccion * salida(valor_x)))

    salida(x)
    if isinstance(modulo, Capa):
        modulo.zero_grad()
    dx = modulo.backward(proyeccion)
    analiticos = {nombre: grad.copy() for nombre, _, grad in modulo.parametros()}

    errores = {}
    for nombre, valor, _ in modulo.parametros():
        plano = valor.reshape(-1)
        indices = list(_indices(valor.shape, max_entradas, rng))
        numerico = np.zeros(len(indices))
        for k, i in enumerate(indices):
            original = plano[i]
            plano[i] = original + eps
            mas = objetivo(x)
            plano[i] = original - eps
            menos = objetivo(x)
            plano[i] = original
            numerico[k] = (mas - menos) / (2.0 * eps)
        errores[nombre] = _norma_relativa(analiticos[nombre].reshape(-1)[indices], numerico)

    plano_x = x.reshape(-1)
    indices = list(_indices(x.shape, max_entradas, rng))
    numerico = np.zeros(len(indices))
    for k, i in enumerate(indices):
        original = plano_x[i]
        plano_x[i] = original + eps
        mas = objetivo(x)
        plano_x[i] = original - eps
        menos = objetivo(x)
        plano_x[i] = original
        numerico[k] = (mas - menos) / (2.0 * eps)
    errores['entrada'] = _norma_relativa(np.asarray(dx).reshape(-1)[indices], numerico)
    return errores
