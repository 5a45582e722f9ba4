import itertools
import math

import numpy as np
from django.test import SimpleTestCase

from apps.arreglos.geometria import ArrayGeometry, DirectionPair, steer
from apps.canal.escenarios import Scenario, Trayecto, synthesize_block
from apps.canal.etiquetas import TABLA_ETIQUETAS, ModelOrderLabel, trayectos_por_fuente
from apps.canal.senales import gen_source_symbols
from apps.covarianza.estimacion import estimate_covariance
from config.exceptions import EntradaDegeneradaError, EtiquetaInconsistenteError
from .algoritmos import associate_enhanced, associate_greedy
from .filtrado import correlated, extract_signal, spatial_filter_weights

PROMEDIOS_DE_REFERENCIA = {2: 0.0, 3: 0.6, 4: 1.6, 5: 4.3}


def oraculo(a, b):
    return a == b, float(a == b)


def fuentes_de_clase(clase):
    """Identificador de fuente por trayecto, p. ej. clase 16 -> [0, 0, 1, 1, 2]."""
    return [s for s, k in enumerate(trayectos_por_fuente(clase)) for _ in range(k)]


def particion_real(ids):
    grupos = {}
    for indice, fuente in enumerate(ids):
        grupos.setdefault(fuente, set()).add(indice)
    return {frozenset(g) for g in grupos.values()}


def como_conjuntos(resultado):
    return {frozenset(c) for c in resultado.partition}


class SpatialFilterTests(SimpleTestCase):
    def test_identidad(self):
        a = np.exp(1j * np.arange(6))
        np.testing.assert_allclose(spatial_filter_weights(np.eye(6), a), a)

    def test_rango_deficiente(self):
        a = np.exp(1j * np.arange(6) * 0.3)
        w = spatial_filter_weights(np.outer(a, a.conj()), a)
        self.assertTrue(np.all(np.isfinite(w)))

    def test_covarianza_nula(self):
        with self.assertRaises(EntradaDegeneradaError):
            spatial_filter_weights(np.zeros((6, 6)), np.ones(6))

    def test_anula_interferente_ortogonal(self):
        a1 = np.array([1, 1, 0, 0, 0, 0], dtype=complex)
        a2 = np.array([1, -1, 0, 0, 0, 0], dtype=complex)
        r = np.outer(a1, a1.conj()) + np.outer(a2, a2.conj())
        w1 = spatial_filter_weights(r, a1)
        rechazo = abs(np.vdot(w1, a2)) ** 2 / abs(np.vdot(w1, a1)) ** 2
        self.assertLess(10 * math.log10(max(rechazo, 1e-300)), -30)


class ExtractSignalTests(SimpleTestCase):
    def test_vector_canonico(self):
        x = np.random.default_rng(0).standard_normal((6, 20)) + 0j
        w = np.zeros(6, dtype=complex)
        w[2] = 1.0
        np.testing.assert_array_equal(extract_signal(w, x), x[2])

    def test_bloque_nulo(self):
        self.assertFalse(np.any(extract_signal(np.ones(6), np.zeros((6, 10)))))

    def test_fuente_unica_sin_ruido(self):
        geom = ArrayGeometry.uca()
        direccion = DirectionPair.desde_grados(50, 60)
        escenario = Scenario(
            label=ModelOrderLabel(1, 1, 1, 1), paths=((Trayecto(direccion, 0, 0.0),),), source_seeds=(3,),
            los_snr=math.inf, noise_variance=0.0, samples_per_block=200,
        )
        bloque = synthesize_block(escenario, geom, 0, np.random.default_rng(1))
        w = spatial_filter_weights(estimate_covariance(bloque), steer(geom, direccion))
        s = extract_signal(w, bloque)
        verdad = gen_source_symbols((3, 0), 200)
        coeficiente = abs(np.vdot(verdad, s)) / (np.linalg.norm(verdad) * np.linalg.norm(s))
        self.assertGreater(coeficiente, 0.99)


class CorrelatedTests(SimpleTestCase):
    def test_copia_retardada(self):
        s = gen_source_symbols(5, 207)
        ok, coeficiente = correlated(s[:200], s[7:207])
        self.assertTrue(ok)
        self.assertGreater(coeficiente, 0.95)

    def test_autocorrelacion(self):
        s = gen_source_symbols(6, 200)
        ok, coeficiente = correlated(s, s)
        self.assertTrue(ok)
        self.assertAlmostEqual(coeficiente, 1.0, places=12)

    def test_energia_nula(self):
        self.assertEqual(correlated(np.zeros(50), gen_source_symbols(1, 50)), (False, 0.0))

    def test_independientes(self):
        coeficientes = []
        for k in range(100):
            a = gen_source_symbols((k, 0), 200, sps=2)
            b = gen_source_symbols((k, 1), 200, sps=2)
            ok, c = correlated(a, b)
            self.assertFalse(ok)
            coeficientes.append(c)
        self.assertLess(np.mean(coeficientes), 0.4)


class GreedyTests(SimpleTestCase):
    def test_una_senal(self):
        resultado = associate_greedy([0], oraculo)
        self.assertEqual((resultado.partition, resultado.correlation_count), (((0,),), 0))

    def test_cinco_independientes(self):
        resultado = associate_greedy([0, 1, 2, 3, 4], oraculo)
        self.assertEqual(resultado.correlation_count, 10)
        self.assertEqual(len(resultado.partition), 5)

    def test_cinco_copias(self):
        resultado = associate_greedy([7] * 5, oraculo)
        self.assertEqual(resultado.correlation_count, 4)
        self.assertEqual(resultado.partition, ((0, 1, 2, 3, 4),))

    def test_con_senales_reales(self):
        s = gen_source_symbols(1, 1030, sps=4)
        otra = gen_source_symbols(2, 1030, sps=4)
        senales = [s[:1000], otra[:1000], s[10:1010], s[25:1025]]
        resultado = associate_greedy(senales)
        self.assertEqual(como_conjuntos(resultado), {frozenset({0, 2}), frozenset({1}), frozenset({3})})
        self.assertGreater(resultado.coeficientes[(2, 0)], 0.95)


class EnhancedTests(SimpleTestCase):
    def test_clase_18_sin_correlaciones(self):
        resultado = associate_enhanced(fuentes_de_clase(18), 5, 5, 1, oraculo)
        self.assertEqual(resultado.correlation_count, 0)
        self.assertEqual(len(resultado.partition), 5)

    def test_clase_12(self):
        literal = associate_enhanced(fuentes_de_clase(12), 1, 5, 5, oraculo, assign_remaining=False)
        self.assertEqual(literal.correlation_count, 4)
        self.assertEqual(literal.partition, ((0, 1, 2, 3, 4),))
        self.assertEqual(associate_enhanced(fuentes_de_clase(12), 1, 5, 5, oraculo).correlation_count, 0)

    def test_tupla_inconsistente(self):
        with self.assertRaises(EtiquetaInconsistenteError):
            associate_enhanced([0, 0, 1], 2, 4, 2, oraculo)
        with self.assertRaises(EtiquetaInconsistenteError):
            associate_enhanced([0, 1, 2], 3, 3, 2, oraculo)

    def test_exhaustivo_con_oraculo(self):
        for clase in TABLA_ETIQUETAS:
            n_S, n_M, n_P = TABLA_ETIQUETAS[clase][:3]
            for orden in set(itertools.permutations(fuentes_de_clase(clase))):
                verdad = particion_real(orden)
                voraz = associate_greedy(orden, oraculo)
                self.assertEqual(como_conjuntos(voraz), verdad)
                for asignar in (True, False):
                    mejorado = associate_enhanced(orden, n_S, n_M, n_P, oraculo, assign_remaining=asignar)
                    self.assertEqual(como_conjuntos(mejorado), verdad)
                    self.assertLessEqual(mejorado.correlation_count, voraz.correlation_count)

    def test_promedios_por_n_m(self):
        conteos = {n: [] for n in PROMEDIOS_DE_REFERENCIA}
        for clase, fila in TABLA_ETIQUETAS.items():
            n_S, n_M, n_P = fila[:3]
            if n_M not in conteos:
                continue
            por_clase = [
                associate_enhanced(orden, n_S, n_M, n_P, oraculo).correlation_count
                for orden in itertools.permutations(fuentes_de_clase(clase))
            ]
            conteos[n_M].append(np.mean(por_clase))
        for n_M, referencia in PROMEDIOS_DE_REFERENCIA.items():
            self.assertAlmostEqual(np.mean(conteos[n_M]), referencia, delta=1.0)
        self.assertAlmostEqual(np.mean(conteos[3]), 5 / 9, places=9)

    def test_particiones_validas_con_correlador_aleatorio(self):
        rng = np.random.default_rng(0)

        def azar(a, b):
            ok = bool(rng.random() < 0.5)
            return ok, float(ok)

        clases = list(TABLA_ETIQUETAS)
        for _ in range(10_000):
            clase = clases[rng.integers(len(clases))]
            n_S, n_M, n_P = TABLA_ETIQUETAS[clase][:3]
            resultado = associate_enhanced(list(range(n_M)), n_S, n_M, n_P, azar,
                                           assign_remaining=bool(rng.integers(2)))
            indices = [i for c in resultado.partition for i in c]
            self.assertEqual(sorted(indices), list(range(n_M)))
            self.assertTrue(all(resultado.partition))
