import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from apps.arreglos.geometria import ArrayGeometry, DirectionPair, distancia_angular, steer, steering_matrix
from apps.orden.eigen import hermitian_eigen
from config.exceptions import OrdenExcesivoError
from .music import GridSpec, estimate_doas, exportar_espectro, music_spectrum, noise_subspace, picos_espectro


def covarianza_puntual(geom, direcciones, ruido=0.0):
    a = steering_matrix(geom, direcciones)
    return a @ a.conj().T + ruido * np.eye(geom.element_count)


def covarianza_muestral(geom, direcciones, snr_db, n, rng):
    """Fuentes gaussianas blancas independientes de potencia unitaria más AWGN."""
    a = steering_matrix(geom, direcciones)
    k = a.shape[1]
    s = (rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))) / math.sqrt(2)
    sigma = math.sqrt(10 ** (-snr_db / 10) / 2)
    x = a @ s + sigma * (rng.standard_normal((geom.element_count, n)) + 1j * rng.standard_normal((geom.element_count, n)))
    return x @ x.conj().T / n


class NoiseSubspaceTests(SimpleTestCase):
    def setUp(self):
        self.geom = ArrayGeometry.uca()

    def test_ortogonal_a_la_senal(self):
        direccion = DirectionPair.desde_grados(70, 40)
        ruido = noise_subspace(covarianza_puntual(self.geom, [direccion]), 1)
        self.assertEqual(ruido.shape, (6, 5))
        self.assertLess(np.max(np.abs(steer(self.geom, direccion).conj() @ ruido)), 1e-8)

    def test_identidad_ortonormal(self):
        ruido = noise_subspace(np.eye(6), 2)
        np.testing.assert_allclose(ruido.conj().T @ ruido, np.eye(4), atol=1e-12)

    def test_coincide_con_autovectores(self):
        rng = np.random.default_rng(2)
        r = covarianza_muestral(self.geom, [DirectionPair.desde_grados(10, 30)], 10, 100, rng)
        ruido = noise_subspace(r, 1)
        v = hermitian_eigen(r).eigenvectors[:, 1:]
        np.testing.assert_allclose(ruido @ ruido.conj().T, v @ v.conj().T, atol=1e-10)

    def test_proyector_idempotente_y_hermitico(self):
        rng = np.random.default_rng(3)
        r = covarianza_muestral(self.geom, [DirectionPair.desde_grados(100, 60)], 5, 50, rng)
        ruido = noise_subspace(r, 2)
        p = ruido @ ruido.conj().T
        np.testing.assert_allclose(p @ p, p, atol=1e-9)
        np.testing.assert_allclose(p, p.conj().T, atol=1e-9)

    def test_orden_excesivo(self):
        with self.assertRaises(OrdenExcesivoError):
            noise_subspace(np.eye(6), 6)


class MusicSpectrumTests(SimpleTestCase):
    def setUp(self):
        self.geom = ArrayGeometry.uca()

    def test_forma_y_valores_positivos(self):
        espectro = music_spectrum(covarianza_puntual(self.geom, [DirectionPair.desde_grados(30, 45)], 0.01), 1,
                                  self.geom)
        self.assertEqual(espectro.valores.shape, (180, 360))
        self.assertTrue(np.all(np.isfinite(espectro.valores)))
        self.assertTrue(np.all(espectro.valores > 0))

    def test_maximo_en_la_celda_de_la_fuente(self):
        espectro = music_spectrum(covarianza_puntual(self.geom, [DirectionPair.desde_grados(40, 50)]), 1, self.geom)
        i, j = np.unravel_index(np.argmax(espectro.valores[:91]), espectro.valores[:91].shape)
        self.assertEqual((i, j), (50, 40))

    def test_invariante_a_escala(self):
        r = covarianza_puntual(self.geom, [DirectionPair.desde_grados(200, 70)], 0.1)
        a = music_spectrum(r, 1, self.geom).valores
        b = music_spectrum(1e4 * r, 1, self.geom).valores
        self.assertEqual(np.argmax(a), np.argmax(b))

    def test_grilla_configurable(self):
        espectro = music_spectrum(np.eye(6) + 0j, 1, self.geom, GridSpec(2.0, 5.0))
        self.assertEqual(espectro.valores.shape, (90, 72))
        self.assertAlmostEqual(math.degrees(espectro.paso_elevacion), 2.0)
        self.assertAlmostEqual(math.degrees(espectro.paso_azimut), 5.0)

    def test_exportar(self):
        espectro = music_spectrum(covarianza_puntual(self.geom, [DirectionPair.desde_grados(40, 50)], 0.1), 1,
                                  self.geom, GridSpec(10.0, 10.0))
        with tempfile.TemporaryDirectory() as tmp:
            ruta = os.path.join(tmp, 'espectro.txt')
            exportar_espectro(espectro, ruta)
            with open(ruta) as f:
                cabecera = [f.readline(), f.readline()]
            datos = np.loadtxt(ruta)
        self.assertIn('elevation_deg', cabecera[0])
        self.assertIn('count=36', cabecera[1])
        self.assertEqual(datos.shape, (18, 36))


class EstimateDoasTests(SimpleTestCase):
    def test_una_fuente_sin_ruido(self):
        geom = ArrayGeometry.uca()
        verdad = DirectionPair.desde_grados(123, 35)
        estimacion = estimate_doas(covarianza_puntual(geom, [verdad]), 1, geom)
        az, el = estimacion.picos[0].direction.grados()
        self.assertLess(abs(az - 123), 1.0)
        self.assertLess(abs(el - 35), 1.0)
        self.assertEqual(estimacion.picos[0].celda, (35, 123))
        self.assertFalse(estimacion.corta)

    def test_sensor_vectorial_hemisferio_inferior(self):
        geom = ArrayGeometry.vector_sensor()
        verdad = DirectionPair.desde_grados(80, 120)
        estimacion = estimate_doas(covarianza_puntual(geom, [verdad]), 1, geom)
        self.assertLess(math.degrees(distancia_angular(estimacion.picos[0].direction, verdad)), 1.0)

    def test_costura_del_azimut(self):
        geom = ArrayGeometry.uca()
        verdad = DirectionPair.desde_grados(359.0, 60)
        pico = estimate_doas(covarianza_puntual(geom, [verdad], 1e-4), 1, geom).picos[0]
        az, _ = pico.direction.grados()
        self.assertLess(min(abs(az - 359.0), 360.0 - abs(az - 359.0)), 1.0)

    def test_pico_espurio_marcado(self):
        geom = ArrayGeometry.uca()
        estimacion = estimate_doas(covarianza_puntual(geom, [DirectionPair.desde_grados(60, 45)], 1e-3), 2, geom)
        if estimacion.corta:
            self.assertEqual(len(estimacion.picos), 1)
        else:
            self.assertTrue(estimacion.picos[1].bajo)
        self.assertFalse(estimacion.picos[0].bajo)

    def test_dos_fuentes_separadas(self):
        geom = ArrayGeometry.uca()
        rng = np.random.default_rng(17)
        verdades = [DirectionPair.desde_grados(40, 50), DirectionPair.desde_grados(200, 70)]
        exitos = 0
        for _ in range(100):
            estimacion = estimate_doas(covarianza_muestral(geom, verdades, 10, 200, rng), 2, geom)
            pendientes = list(verdades)
            ok = len(estimacion.picos) == 2
            for pico in estimacion.picos:
                distancias = [distancia_angular(pico.direction, v) for v in pendientes]
                k = int(np.argmin(distancias))
                ok = ok and math.degrees(distancias[k]) <= 2.0
                pendientes.pop(k)
            exitos += ok
        self.assertGreaterEqual(exitos, 95)

    def test_ordenados_por_puntaje(self):
        geom = ArrayGeometry.uca()
        r = covarianza_puntual(geom, [DirectionPair.desde_grados(40, 50), DirectionPair.desde_grados(220, 80)], 0.01)
        puntajes = [p.score for p in estimate_doas(r, 2, geom).picos]
        self.assertEqual(puntajes, sorted(puntajes, reverse=True))

    def test_orden_subestimado_resuelve_menos_picos(self):
        geom = ArrayGeometry.uca()
        verdades = [DirectionPair.desde_grados(40, 50), DirectionPair.desde_grados(160, 70),
                    DirectionPair.desde_grados(280, 60)]
        r = covarianza_puntual(geom, verdades, 1e-3)

        def resueltos(estimacion):
            pendientes = list(verdades)
            for pico in estimacion.picos:
                if pico.bajo or not pendientes:
                    continue
                distancias = [distancia_angular(pico.direction, v) for v in pendientes]
                k = int(np.argmin(distancias))
                if math.degrees(distancias[k]) <= 3.0:
                    pendientes.pop(k)
            return len(verdades) - len(pendientes)

        self.assertEqual(resueltos(estimate_doas(r, 3, geom)), 3)
        for orden in (1, 2):
            with self.subTest(orden=orden):
                subestimado = picos_espectro(music_spectrum(r, orden, geom), 3, hemisferio_superior=True)
                self.assertLess(resueltos(subestimado), 3)
