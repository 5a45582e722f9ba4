import math

import numpy as np
from django.test import SimpleTestCase

from config.exceptions import EntradaVaciaError, FueraDeRangoError, GeometriaInvalidaError
from .geometria import (
    ArrayGeometry, DirectionPair, distancia_angular, geometria_por_nombre,
    steer, steer_many, steer_uca, steer_ura, steer_vs, steering_matrix,
)


class DirectionPairTests(SimpleTestCase):
    def test_rangos_semiabiertos(self):
        DirectionPair(0.0, 0.0)
        with self.assertRaises(FueraDeRangoError):
            DirectionPair(2 * math.pi, 0.1)
        with self.assertRaises(FueraDeRangoError):
            DirectionPair(0.1, math.pi)
        with self.assertRaises(FueraDeRangoError):
            DirectionPair(float('nan'), 0.1)

    def test_normalizada_envuelve_azimut(self):
        d = DirectionPair.normalizada(-0.5, 4.0)
        self.assertAlmostEqual(d.azimuth, 2 * math.pi - 0.5)
        self.assertLess(d.elevation, math.pi)

    def test_distancia_angular(self):
        a = DirectionPair.desde_grados(0, 90)
        b = DirectionPair.desde_grados(90, 90)
        self.assertAlmostEqual(distancia_angular(a, b), math.pi / 2)


class GeometriaTests(SimpleTestCase):
    def test_arreglos_por_defecto(self):
        for nombre, e in (('ura', 6), ('uca6', 6), ('uca12', 12), ('vs', 6)):
            self.assertEqual(geometria_por_nombre(nombre).element_count, e)
        with self.assertRaises(GeometriaInvalidaError):
            geometria_por_nombre('lineal')

    def test_ura_valida_producto(self):
        with self.assertRaises(GeometriaInvalidaError):
            ArrayGeometry(kind='URA', element_count=6, wavelength=1.0, ura_rows=2, ura_cols=2,
                          ura_spacing=(0.5, 0.5))

    def test_descriptor_ida_y_vuelta(self):
        geom = ArrayGeometry.ura()
        self.assertEqual(ArrayGeometry.desde_descriptor(geom.descriptor()), geom)


class SteeringTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_ura_cenit_es_unos(self):
        geom = ArrayGeometry.ura()
        a = steer_ura(geom, DirectionPair(1.3, 0.0))
        np.testing.assert_allclose(a, np.ones(6))

    def test_ura_evaluacion_directa(self):
        geom = ArrayGeometry(kind='URA', element_count=6, wavelength=1.0, ura_rows=2, ura_cols=3,
                             ura_spacing=(0.5, 0.5))
        a = steer_ura(geom, DirectionPair(0.0, math.pi / 2))
        # (i, j) = (1, 0) en orden por filas
        self.assertAlmostEqual(a[3], -1.0 + 0j)

    def test_uca_entrada_cero(self):
        geom = ArrayGeometry.uca()
        a = steer_uca(geom, DirectionPair(0.0, math.pi / 2))
        self.assertAlmostEqual(a[0], np.exp(1j * 0.4 * math.pi))
        np.testing.assert_allclose(steer_uca(geom, DirectionPair(2.0, 0.0)), np.ones(6))

    def test_uca_simetria_ciclica(self):
        geom = ArrayGeometry.uca()
        theta, phi = 1.1, 0.3
        base = steer_many(geom, theta, phi)
        for k in range(1, 6):
            rotado = steer_many(geom, theta, phi + 2 * math.pi * k / 6)
            np.testing.assert_allclose(rotado, np.roll(base, k), atol=1e-12)

    def test_modulo_unitario(self):
        elev = self.rng.uniform(0, math.pi, 10_000)
        azim = self.rng.uniform(0, 2 * math.pi, 10_000)
        for geom in (ArrayGeometry.ura(), ArrayGeometry.uca(), ArrayGeometry.uca(elementos=12)):
            a = steer_many(geom, elev, azim)
            self.assertLess(np.max(np.abs(np.abs(a) - 1.0)), 1e-12)

    def test_vs_ejemplo_directo(self):
        geom = ArrayGeometry.vector_sensor()
        a = steer_vs(geom, DirectionPair(0.0, 0.0))
        r = math.sqrt(2) / 2
        np.testing.assert_allclose(a, [r, r, 0, -r, r, 0], atol=1e-12)

    def test_vs_gamma_cero_selecciona_segunda_columna(self):
        geom = ArrayGeometry.vector_sensor(polarizacion=(0.0, 0.0))
        theta, phi = 0.7, 2.1
        a = steer_vs(geom, DirectionPair(phi, theta))
        esperado = [-math.sin(phi), math.cos(phi), 0.0, -math.cos(theta) * math.cos(phi),
                    -math.cos(theta) * math.sin(phi), math.sin(theta)]
        np.testing.assert_allclose(a, esperado, atol=1e-12)

    def test_vs_real_con_eta_cero(self):
        geom = ArrayGeometry.vector_sensor()
        a = steer_many(geom, self.rng.uniform(0, math.pi, 500), self.rng.uniform(0, 2 * math.pi, 500))
        self.assertTrue(np.all(np.abs(a.imag) < 1e-15))
        self.assertTrue(np.all(np.linalg.norm(a, axis=-1) <= math.sqrt(2) + 1e-12))

    def test_vs_campos_e_h_unitarios(self):
        geom = ArrayGeometry.vector_sensor(polarizacion=(0.6, 1.1))
        elev = self.rng.uniform(0, math.pi, 300)
        azim = self.rng.uniform(0, 2 * math.pi, 300)
        a = steer_many(geom, elev, azim)
        # Campo eléctrico y magnético de norma 1 cada uno.
        np.testing.assert_allclose(np.linalg.norm(a[:, :3], axis=-1), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(a[:, 3:], axis=-1), 1.0, atol=1e-12)
        self.assertAlmostEqual(np.linalg.norm(steer_vs(geom, DirectionPair(0.0, math.pi / 2))), math.sqrt(2))

    def test_tipo_incorrecto(self):
        with self.assertRaises(GeometriaInvalidaError):
            steer_ura(ArrayGeometry.uca(), DirectionPair(0.0, 0.0))
        with self.assertRaises(GeometriaInvalidaError):
            steer_vs(ArrayGeometry.ura(), DirectionPair(0.0, 0.0))


class SteeringMatrixTests(SimpleTestCase):
    def test_columna_igual_al_vector(self):
        d = DirectionPair(0.4, 1.2)
        for geom in (ArrayGeometry.ura(), ArrayGeometry.uca(), ArrayGeometry.vector_sensor()):
            np.testing.assert_allclose(steering_matrix(geom, [d])[:, 0], steer(geom, d))

    def test_direccion_duplicada_rango_uno(self):
        d = DirectionPair(0.4, 1.2)
        A = steering_matrix(ArrayGeometry.uca(), [d, d])
        np.testing.assert_allclose(A[:, 0], A[:, 1])
        self.assertEqual(np.linalg.matrix_rank(A, tol=1e-9), 1)

    def test_tres_direcciones_rango_tres(self):
        rng = np.random.default_rng(3)
        dirs = [DirectionPair(rng.uniform(0, 2 * math.pi), rng.uniform(0.3, 1.4)) for _ in range(3)]
        s = np.linalg.svd(steering_matrix(ArrayGeometry.uca(), dirs), compute_uv=False)
        self.assertTrue(np.all(s > 1e-9))

    def test_lista_vacia(self):
        with self.assertRaises(EntradaVaciaError):
            steering_matrix(ArrayGeometry.uca(), [])
