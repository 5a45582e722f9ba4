from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from apps.arreglos.geometria import ArrayGeometry, DirectionPair
from apps.canal.escenarios import Scenario, ScenarioConfig, Trayecto, sample_scenario, synthesize_blocks
from apps.canal.etiquetas import ModelOrderLabel
from config.exceptions import BloquesInsuficientesError, EntradaInvalidaError, FueraDeRangoError
from .estimacion import CovarianceMatrix, estimate_covariance, from_feature, temporal_smooth, to_feature


def cov_aleatoria(rng, E=6, n=50):
    x = rng.standard_normal((E, n)) + 1j * rng.standard_normal((E, n))
    return estimate_covariance(x)


class EstimateCovarianceTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_hermitica_y_semidefinida(self):
        cov = cov_aleatoria(self.rng)
        self.assertTrue(cov.es_hermitica())
        self.assertGreaterEqual(np.linalg.eigvalsh(cov.entries).min(), -1e-10)
        self.assertEqual(cov.snapshot_count, 50)

    def test_una_sola_columna(self):
        x = np.array([[1.0], [1j], [0.0]])
        cov = estimate_covariance(x)
        self.assertEqual(np.linalg.matrix_rank(cov.entries), 1)
        np.testing.assert_allclose(cov.entries, np.outer(x[:, 0], x[:, 0].conj()))

    def test_bloque_vacio(self):
        with self.assertRaises(EntradaInvalidaError):
            estimate_covariance(np.zeros((6, 0), dtype=complex))

    def test_no_finito(self):
        x = np.ones((3, 4), dtype=complex)
        x[1, 2] = np.nan
        with self.assertRaises(EntradaInvalidaError):
            estimate_covariance(x)


class FeatureTests(SimpleTestCase):
    def test_canales_real_imaginario(self):
        cov = cov_aleatoria(np.random.default_rng(1))
        f = to_feature(cov)
        self.assertEqual(f.shape, (6, 6, 2))
        np.testing.assert_array_equal(f[..., 0], cov.entries.real)
        np.testing.assert_array_equal(f[..., 1], cov.entries.imag)
        np.testing.assert_array_equal(from_feature(f).entries, cov.entries)

    def test_forma_invalida(self):
        with self.assertRaises(EntradaInvalidaError):
            from_feature(np.zeros((6, 5, 2)))


class TemporalSmoothTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.covs = [cov_aleatoria(self.rng) for _ in range(5)]

    def test_b_uno_es_el_primer_bloque(self):
        suavizada = temporal_smooth(self.covs, 1)
        np.testing.assert_allclose(suavizada.entries, self.covs[0].entries)
        self.assertEqual(suavizada.smoothed_over, 1)

    def test_usa_bloques_alternos(self):
        suavizada = temporal_smooth(self.covs, 3)
        esperada = (self.covs[0].entries + self.covs[2].entries + self.covs[4].entries) / 3
        np.testing.assert_allclose(suavizada.entries, esperada)

    def test_bloques_insuficientes(self):
        with self.assertRaises(BloquesInsuficientesError) as ctx:
            temporal_smooth(self.covs[:4], 3)
        self.assertEqual(ctx.exception.requeridos, 5)

    def test_b_invalido(self):
        with self.assertRaises(FueraDeRangoError):
            temporal_smooth(self.covs, 0)

    def test_restaura_rango_de_trayectos_coherentes(self):
        geom = ArrayGeometry.uca()
        trayectos = (
            Trayecto(DirectionPair.desde_grados(30, 60), 0, 0.0),
            Trayecto(DirectionPair.desde_grados(150, 75), 0, 0.0),
        )
        escenario = Scenario(
            label=ModelOrderLabel(1, 2, 2, 2), paths=(trayectos,), source_seeds=(5,),
            los_snr=float('inf'), noise_variance=0.0, samples_per_block=200,
        )
        covs = [estimate_covariance(b) for b in synthesize_blocks(escenario, geom, 3, self.rng)]
        sin_suavizar = np.sort(np.linalg.eigvalsh(covs[0].entries))[::-1]
        suavizada = np.sort(np.linalg.eigvalsh(temporal_smooth(covs, 2).entries))[::-1]
        self.assertLess(sin_suavizar[1], 1e-9 * sin_suavizar[0])
        self.assertGreater(suavizada[1], 1e-6 * suavizada[0])
        self.assertLess(suavizada[2], 1e-9 * suavizada[0])

    def test_matriz_sin_suavizar_tiene_b_uno(self):
        cov = CovarianceMatrix(entries=np.eye(2), snapshot_count=4)
        self.assertEqual(cov.smoothed_over, 1)
        self.assertEqual(cov.dimension, 2)

    def test_suavizado_recupera_k_trayectos_coherentes(self):
        geom = ArrayGeometry.vector_sensor()
        config = ScenarioConfig(delay_range=(0, 0), cone_half_angle=90.0)
        rng = np.random.default_rng(11)
        for k, clase in ((2, 2), (3, 4), (4, 7)):
            with self.subTest(k=k):
                for _ in range(100):
                    escenario = replace(sample_scenario(rng, config, forced_class18=clase), noise_variance=0.0)
                    self.assertEqual(escenario.label.n_M, k)
                    bloques = synthesize_blocks(escenario, geom, 2 * (k + 1) - 1, rng)
                    covs = [estimate_covariance(b) for b in bloques]
                    crudo = np.sort(np.linalg.eigvalsh(covs[0].entries))[::-1]
                    suavizado = np.sort(np.linalg.eigvalsh(temporal_smooth(covs, k + 1).entries))[::-1]
                    self.assertLess(crudo[1], 1e-9 * crudo[0])
                    self.assertEqual(int(np.sum(suavizado > 1e-6 * suavizado[0])), k)


class RuidoVsInstantaneasTests(SimpleTestCase):
    def test_duplicar_n_reduce_el_error_en_raiz_de_dos(self):
        rng = np.random.default_rng(5)
        E = 6

        def error_medio(n):
            errores = []
            for _ in range(100):
                x = (rng.standard_normal((E, n)) + 1j * rng.standard_normal((E, n))) / np.sqrt(2.0)
                errores.append(np.linalg.norm(estimate_covariance(x).entries - np.eye(E)))
            return np.mean(errores)

        razon = error_medio(200) / error_medio(400)
        self.assertGreater(razon, np.sqrt(2) * 0.85)
        self.assertLess(razon, np.sqrt(2) * 1.15)
