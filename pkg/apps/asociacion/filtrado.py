"""Filtrado espacial W = R⁺·â y correlación cruzada normalizada entre señales extraídas."""
import numpy as np
from scipy import signal

from apps.orden.eigen import hermitian_eigen
from config.exceptions import EntradaDegeneradaError, FormaInvalidaError

UMBRAL_CORRELACION = 0.6
RETARDO_MAXIMO = 20
TRUNCADO_PSEUDOINVERSA = 1e-8


def pseudo_inversa(cov):
    """Pseudo-inversa hermítica; se descartan los autovalores < 1e-8 × máximo."""
    descomposicion = hermitian_eigen(cov)
    valores, vectores = descomposicion.eigenvalues, descomposicion.eigenvectors
    maximo = valores.max()
    if not maximo > 0:
        raise EntradaDegeneradaError("La covarianza es nula; no hay filtro espacial.")
    conservar = valores > TRUNCADO_PSEUDOINVERSA * maximo
    v = vectores[:, conservar]
    return (v / valores[conservar]) @ v.conj().T


def spatial_filter_weights(cov, steering):
    steering = np.asarray(steering, dtype=complex)
    entries = np.asarray(getattr(cov, 'entries', cov))
    if steering.shape != (entries.shape[0],):
        raise FormaInvalidaError(f"El vector de dirección debe tener longitud {entries.shape[0]}.")
    return pseudo_inversa(entries) @ steering


def extract_signal(weights, snapshot):
    """ŝ(t) = Wᴴ·x(t) para cada muestra del bloque."""
    x = np.asarray(getattr(snapshot, 'samples', snapshot))
    return np.conj(weights) @ x


def correlated(s_i, s_j, threshold=UMBRAL_CORRELACION, max_lag=RETARDO_MAXIMO):
    """
    Máximo |correlación cruzada normalizada| en retardos [−max_lag, max_lag].

    Devuelve (coeficiente ≥ threshold, coeficiente); con energía nula, (False, 0.0).
    """
    s_i = np.asarray(s_i, dtype=complex)
    s_j = np.asarray(s_j, dtype=complex)
    energia = np.vdot(s_i, s_i).real * np.vdot(s_j, s_j).real
    if energia <= 0.0:
        return False, 0.0
    cruzada = signal.correlate(s_i, s_j, mode='full', method='direct')
    retardos = signal.correlation_lags(len(s_i), len(s_j), mode='full')
    ventana = np.abs(retardos) <= max_lag
    coeficiente = min(1.0, float(np.max(np.abs(cruzada[ventana]))) / float(np.sqrt(energia)))
    return coeficiente >= threshold, coeficiente


def correlador_por_bloques(threshold=UMBRAL_CORRELACION, max_lag=RETARDO_MAXIMO):
    """
    Correlador para señales extraídas en varios bloques: promedia el
    coeficiente de cada bloque y compara el promedio con el umbral.
    """
    def correlar(bloques_i, bloques_j):
        coeficientes = [correlated(a, b, threshold, max_lag)[1] for a, b in zip(bloques_i, bloques_j)]
        media = float(np.mean(coeficientes)) if coeficientes else 0.0
        return media >= threshold, media
    return correlar
