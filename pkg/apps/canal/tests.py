import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from apps.arreglos.geometria import ArrayGeometry, DirectionPair, distancia_angular
from apps.covarianza.estimacion import estimate_covariance, to_feature
from config.exceptions import EtiquetaInvalidaError, FueraDeRangoError
from .dataset import features_and_labels, generate_dataset, read_dataset, regenerate_blocks
from .escenarios import Scenario, ScenarioConfig, Trayecto, sample_scenario, synthesize_block
from .etiquetas import (
    TABLA_ETIQUETAS, ModelOrderLabel, coarsen_label, decode_label, encode_label, patron_letras,
)
from .senales import gen_source_symbols
from .serializers import ScenarioConfigSerializer


def autovalores(cov):
    return np.sort(np.linalg.eigvalsh(cov.entries))[::-1]


def escenario_manual(trayectos_por_fuente, ruido=0.0, n=200):
    """Escenario construido a mano: lista de fuentes, cada una con (az°, el°, retardo)."""
    fuentes = []
    for fuente in trayectos_por_fuente:
        fuentes.append(tuple(
            Trayecto(DirectionPair.desde_grados(az, el), retardo, 0.0) for az, el, retardo in fuente
        ))
    conteos = [len(f) for f in fuentes]
    etiqueta = ModelOrderLabel(len(conteos), sum(conteos), max(conteos),
                               encode_label(len(conteos), sum(conteos), max(conteos)))
    return Scenario(
        label=etiqueta, paths=tuple(fuentes), source_seeds=tuple(range(11, 11 + len(fuentes))),
        los_snr=math.inf if ruido == 0 else -10 * math.log10(ruido),
        noise_variance=ruido, samples_per_block=n,
    )


class EtiquetasTests(SimpleTestCase):
    def test_codificacion_tabla(self):
        self.assertEqual(encode_label(3, 5, 2), 16)
        self.assertEqual(decode_label(14), (2, 5, 3))
        self.assertEqual(patron_letras(14), '(A,A,A,B,B)')
        self.assertEqual(patron_letras(16), '(A,A,B,B,C)')

    def test_biyeccion(self):
        for clase in TABLA_ETIQUETAS:
            self.assertEqual(encode_label(*decode_label(clase)), clase)

    def test_agrupacion(self):
        self.assertEqual(coarsen_label(7, 'nine'), 6)
        self.assertEqual(coarsen_label(7, 'five'), 4)
        self.assertEqual(coarsen_label(19, 'nine'), 10)
        self.assertEqual(coarsen_label(19, 'five'), 6)
        self.assertEqual(coarsen_label(12, 'eighteen'), 12)

    def test_tupla_invalida(self):
        with self.assertRaises(EtiquetaInvalidaError):
            encode_label(3, 2, 1)
        with self.assertRaises(FueraDeRangoError):
            decode_label(20)


class SenalesTests(SimpleTestCase):
    def test_determinista(self):
        np.testing.assert_array_equal(gen_source_symbols(4, 500), gen_source_symbols(4, 500))

    def test_potencia_unitaria(self):
        s = gen_source_symbols(123, 10_000)
        self.assertTrue(0.9 <= np.mean(np.abs(s) ** 2) <= 1.1)

    def test_semillas_distintas_poco_correlacionadas(self):
        coeficientes = []
        for k in range(20):
            a = gen_source_symbols((k, 0), 4096)
            b = gen_source_symbols((k, 1), 4096)
            coeficientes.append(abs(np.vdot(a, b)) / math.sqrt(np.vdot(a, a).real * np.vdot(b, b).real))
        self.assertLess(np.mean(coeficientes), 0.2)

    def test_muestras_invalidas(self):
        with self.assertRaises(FueraDeRangoError):
            gen_source_symbols(0, 0)


class SampleScenarioTests(SimpleTestCase):
    def setUp(self):
        self.config = ScenarioConfig()
        self.rng = np.random.default_rng(2024)

    def test_clase_forzada(self):
        escenario = sample_scenario(self.rng, self.config, forced_class18=14)
        e = escenario.label
        self.assertEqual((e.n_S, e.n_M, e.n_P), (2, 5, 3))

    def test_clase_uno_solo_los(self):
        escenario = sample_scenario(self.rng, self.config, forced_class18=1)
        self.assertEqual(len(escenario.trayectos()), 1)
        self.assertEqual(escenario.trayectos()[0].delay, 0)
        self.assertEqual(escenario.trayectos()[0].power_db, 0.0)

    def test_clase_invalida(self):
        with self.assertRaises(FueraDeRangoError):
            sample_scenario(self.rng, self.config, forced_class18=20)

    def test_recuento_y_cono(self):
        for _ in range(500):
            escenario = sample_scenario(self.rng, self.config)
            conteos = [len(f) for f in escenario.paths]
            self.assertEqual(max(conteos), escenario.label.n_P)
            self.assertEqual(sum(conteos), escenario.label.n_M)
            for fuente in escenario.paths:
                los = fuente[0]
                self.assertEqual((los.delay, los.power_db), (0, 0.0))
                for tr in fuente[1:]:
                    self.assertLessEqual(distancia_angular(los.direction, tr.direction), math.radians(15) + 1e-9)
                    self.assertTrue(1 <= tr.delay <= 20)
                    self.assertTrue(-3.0 <= tr.power_db <= 0.0)

    def test_histograma_uniforme(self):
        clases = [sample_scenario(self.rng, self.config).label.class18 for _ in range(10_000)]
        conteo = np.bincount(clases, minlength=19)[1:]
        self.assertGreater(stats.chisquare(conteo).pvalue, 1e-3)

    def test_sobrecargada(self):
        config = ScenarioConfig(overloaded_fraction=1.0)
        for _ in range(50):
            e = sample_scenario(self.rng, config).label
            self.assertEqual(e.class18, 19)
            self.assertIn(e.n_M, (6, 7, 8))

    def test_elevacion_uniforme_en_esfera(self):
        cosenos = [math.cos(sample_scenario(self.rng, self.config, 1).paths[0][0].direction.elevation)
                   for _ in range(4000)]
        self.assertGreater(stats.kstest(cosenos, 'uniform', args=(-1, 2)).pvalue, 1e-3)


class SynthesizeBlockTests(SimpleTestCase):
    def setUp(self):
        self.geom = ArrayGeometry.uca()
        self.rng = np.random.default_rng(99)

    def test_una_fuente_rango_uno(self):
        escenario = escenario_manual([[(40, 70, 0)]])
        lam = autovalores(estimate_covariance(synthesize_block(escenario, self.geom, 0, self.rng)))
        self.assertLess(lam[1], 1e-9 * lam[0])

    def test_trayectos_coherentes_colapsan(self):
        escenario = escenario_manual([[(40, 70, 0), (55, 80, 0)]])
        lam = autovalores(estimate_covariance(synthesize_block(escenario, self.geom, 0, self.rng)))
        self.assertLess(lam[1], 1e-9 * lam[0])

    def test_dos_fuentes_independientes(self):
        escenario = escenario_manual([[(40, 70, 0)], [(200, 60, 0)]])
        lam = autovalores(estimate_covariance(synthesize_block(escenario, self.geom, 0, self.rng)))
        self.assertGreater(lam[1], 1e-9 * lam[0])
        self.assertLess(lam[2], 1e-9 * lam[0])

    def test_ganancias_independientes_entre_bloques(self):
        escenario = escenario_manual([[(40, 70, 0)]], n=8)
        h = np.array([synthesize_block(escenario, self.geom, b, self.rng).gains[0][0] for b in range(4000)])
        self.assertLess(abs(np.mean(h[1:] * np.conj(h[:-1]))), 0.05)
        self.assertAlmostEqual(np.mean(np.abs(h) ** 2), 1.0, delta=0.1)

    def test_snr_por_elemento(self):
        ruido = 10 ** (-5 / 10)
        escenario = escenario_manual([[(40, 70, 0)]], ruido=ruido)
        potencia = np.mean([
            np.mean(np.abs(synthesize_block(escenario, self.geom, b, self.rng).samples) ** 2)
            for b in range(1000)
        ])
        snr_medida = 10 * math.log10((potencia - ruido) / ruido)
        self.assertAlmostEqual(snr_medida, 5.0, delta=0.5)


class DatasetTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.dir.cleanup)
        self.geom = ArrayGeometry.uca()
        self.config = ScenarioConfig()

    def ruta(self, nombre):
        return os.path.join(self.dir.name, nombre)

    def test_determinista(self):
        a = generate_dataset(self.config, 10, 5, self.ruta('a.bin'), self.geom, 'uca6')
        b = generate_dataset(self.config, 10, 5, self.ruta('b.bin'), self.geom, 'uca6')
        self.assertEqual(a['digest'], b['digest'])
        with open(self.ruta('a.bin'), 'rb') as fa, open(self.ruta('b.bin'), 'rb') as fb:
            self.assertEqual(fa.read(), fb.read())

    def test_cabecera_ida_y_vuelta(self):
        config = ScenarioConfig(snr_range=(0.0, 10.0), classes=(1, 2, 3))
        generate_dataset(config, 12, 8, self.ruta('d.bin'), self.geom, 'uca6')
        meta, registros = read_dataset(self.ruta('d.bin'))
        self.assertEqual(ScenarioConfig.desde_echo(meta['config']), config)
        self.assertEqual((meta['E'], meta['N'], meta['count'], meta['seed']), (6, 200, 12, 8))
        caracteristicas, etiquetas = features_and_labels(meta, registros)
        self.assertEqual(caracteristicas.shape, (12, 6, 6, 2))
        self.assertTrue(set(etiquetas) <= {1, 2, 3})
        for r in registros:
            self.assertEqual(int(np.sum(~np.isnan(r['doas'][:, 0]))), min(int(r['n_m']), 5))

    def test_regenerar_bloques(self):
        generate_dataset(self.config, 3, 1, self.ruta('r.bin'), self.geom, 'uca6')
        meta, registros = read_dataset(self.ruta('r.bin'))
        escenario, bloques = regenerate_blocks(registros[2], meta, 3)
        self.assertEqual(len(bloques), 3)
        self.assertEqual(escenario.label.class18, registros[2]['class18'])
        np.testing.assert_allclose(
            to_feature(estimate_covariance(bloques[0])).astype(np.float32).ravel(),
            registros[2]['feature'], rtol=1e-6, atol=1e-6,
        )

    def test_conteo_por_clase_uniforme(self):
        resumen = generate_dataset(self.config, 3600, 3, self.ruta('u.bin'), self.geom)
        conteo = [resumen['class_counts'].get(str(c), 0) for c in range(1, 19)]
        self.assertGreater(stats.chisquare(conteo).pvalue, 1e-3)

    def test_count_invalido(self):
        with self.assertRaises(FueraDeRangoError):
            generate_dataset(self.config, 0, 1, self.ruta('x.bin'), self.geom)


class ScenarioConfigSerializerTests(SimpleTestCase):
    def test_claves_validas(self):
        s = ScenarioConfigSerializer(data={'snr_range': '0,10', 'delay_range': '1,5', 'classes': '1-6'})
        self.assertTrue(s.is_valid(), s.errors)
        config = s.save()
        self.assertEqual(config.snr_range, (0.0, 10.0))
        self.assertEqual(config.delay_range, (1, 5))
        self.assertEqual(config.classes, (1, 2, 3, 4, 5, 6))
        self.assertAlmostEqual(config.coherence_time, 299792458.0 / (100 * 2.7e9))

    def test_rango_vacio(self):
        s = ScenarioConfigSerializer(data={'snr_range': '10,0'})
        self.assertFalse(s.is_valid())
        self.assertIn('snr_range', s.errors)

    def test_clases_fuera_de_rango(self):
        s = ScenarioConfigSerializer(data={'classes': '1,19'})
        self.assertFalse(s.is_valid())
