import numpy as np
from django.test import SimpleTestCase

from apps.arreglos.geometria import ArrayGeometry, DirectionPair
from apps.canal.escenarios import Scenario, ScenarioConfig, Trayecto, sample_scenario, synthesize_block
from apps.canal.etiquetas import ModelOrderLabel
from apps.covarianza.estimacion import estimate_covariance
from config.exceptions import EntradaInvalidaError, FueraDeRangoError
from .criterios import aic_estimate, closeness_statistic, criterion_scores, estimar_orden, mdl_estimate
from .eigen import hermitian_eigen, jacobi_eigenvalues


def hermitica_aleatoria(rng, E=6):
    a = rng.standard_normal((E, E)) + 1j * rng.standard_normal((E, E))
    return a @ a.conj().T


class HermitianEigenTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_descendente_y_reconstruccion(self):
        r = hermitica_aleatoria(self.rng)
        d = hermitian_eigen(r)
        self.assertTrue(np.all(np.diff(d.eigenvalues) <= 0))
        np.testing.assert_allclose(d.reconstruir(), r, atol=1e-10)
        np.testing.assert_allclose(d.eigenvectors.conj().T @ d.eigenvectors, np.eye(6), atol=1e-10)

    def test_diagonal(self):
        d = hermitian_eigen(np.diag([0.0, 2.0, 0.0, 3.0, 1.0, 0.0]))
        np.testing.assert_allclose(d.eigenvalues, [3, 2, 1, 0, 0, 0], atol=1e-12)

    def test_no_hermitica(self):
        r = hermitica_aleatoria(self.rng)
        r[0, 1] += 1.0
        with self.assertRaises(EntradaInvalidaError):
            hermitian_eigen(r)

    def test_jacobi_coincide(self):
        for _ in range(5):
            r = hermitica_aleatoria(self.rng)
            np.testing.assert_allclose(
                jacobi_eigenvalues(r), hermitian_eigen(r).eigenvalues, rtol=1e-9, atol=1e-9,
            )


class ClosenessStatisticTests(SimpleTestCase):
    def test_autovalores_iguales(self):
        for d in range(6):
            self.assertAlmostEqual(closeness_statistic([2.0] * 6, d, 200), 0.0, places=9)

    def test_bloque_de_ruido_igual(self):
        valores = [4.0, 1.0, 1.0, 1.0, 1.0, 1.0]
        self.assertAlmostEqual(closeness_statistic(valores, 1, 200), 0.0, places=9)
        self.assertGreater(closeness_statistic(valores, 0, 200), 0.0)
        self.assertEqual(closeness_statistic(valores, 5, 200), 0.0)

    def test_no_negativo(self):
        rng = np.random.default_rng(0)
        valores = rng.uniform(0.1, 5.0, 6)
        for d in range(6):
            self.assertGreaterEqual(closeness_statistic(valores, d, 100), 0.0)

    def test_d_fuera_de_rango(self):
        with self.assertRaises(FueraDeRangoError):
            closeness_statistic([1.0, 1.0], 2, 10)

    def test_autovalor_nulo_se_recorta(self):
        with self.assertLogs('apps.orden.criterios', level='WARNING'):
            valor = closeness_statistic([3.0, 1.0, 0.0], 1, 50)
        self.assertTrue(np.isfinite(valor))

    def test_puntajes_por_d(self):
        self.assertEqual(criterion_scores([4.0, 1.0, 1.0, 1.0], 100, 'mdl').shape, (4,))
        with self.assertRaises(FueraDeRangoError):
            criterion_scores([4.0, 1.0], 100, 'bic')


class EstimadoresTests(SimpleTestCase):
    def setUp(self):
        self.geom = ArrayGeometry.uca()
        self.rng = np.random.default_rng(21)

    def test_dos_fuentes_separadas(self):
        escenario = Scenario(
            label=ModelOrderLabel(2, 2, 1, 3),
            paths=(
                (Trayecto(DirectionPair.desde_grados(40, 60), 0, 0.0),),
                (Trayecto(DirectionPair.desde_grados(220, 80), 0, 0.0),),
            ),
            source_seeds=(1, 2), los_snr=10.0, noise_variance=0.1, samples_per_block=200,
        )
        aciertos = sum(
            mdl_estimate(estimate_covariance(synthesize_block(escenario, self.geom, b, self.rng)), 200) == 2
            for b in range(100)
        )
        self.assertGreaterEqual(aciertos, 95)

    def test_trayectos_coherentes_se_subestiman(self):
        config = ScenarioConfig(snr_range=(10.0, 10.0))
        self.assertEqual(config.delay_range, (1, 20))
        unos = 0
        for _ in range(500):
            escenario = sample_scenario(self.rng, config, forced_class18=2)
            cov = estimate_covariance(synthesize_block(escenario, self.geom, 0, self.rng))
            unos += mdl_estimate(cov, 200) == 1
        self.assertGreaterEqual(unos, 400)

    def test_invariante_a_escala(self):
        r = hermitica_aleatoria(self.rng)
        self.assertEqual(mdl_estimate(r, 200), mdl_estimate(1e6 * r, 200))
        self.assertEqual(aic_estimate(r, 200), aic_estimate(1e-6 * r, 200))

    def test_estimaciones_en_rango(self):
        for _ in range(20):
            r = hermitica_aleatoria(self.rng)
            self.assertIn(mdl_estimate(r, 200), range(6))
            self.assertIn(aic_estimate(r, 200), range(6))

    def test_matriz_identidad(self):
        self.assertEqual(mdl_estimate(np.eye(6), 200), 0)

    def test_estimacion_marca_recorte(self):
        with self.assertLogs('apps.orden.criterios', level='WARNING'):
            recortada = estimar_orden(np.diag([3.0, 1.0, 0.0, 0.0]), 200, 'mdl')
        self.assertTrue(recortada.recortada)
        self.assertEqual(recortada.scores.shape, (4,))

        limpia = estimar_orden(np.diag([3.0, 1.0, 1.0, 1.0]), 200, 'mdl')
        self.assertFalse(limpia.recortada)
        self.assertEqual(limpia.orden, 1)
        self.assertEqual(limpia.orden, mdl_estimate(np.diag([3.0, 1.0, 1.0, 1.0]), 200))
