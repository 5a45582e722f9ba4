import json
import math
import os
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from apps.arreglos.geometria import ArrayGeometry, DirectionPair, steering_matrix
from apps.auditoria.models import Bitacora
from apps.canal.dataset import generate_dataset, read_dataset
from apps.canal.escenarios import Scenario, ScenarioConfig, Trayecto, synthesize_blocks
from apps.canal.etiquetas import ModelOrderLabel, encode_label
from apps.covarianza.estimacion import CovarianceMatrix
from apps.orden.criterios import mdl_estimate
from config.exceptions import BloquesInsuficientesError, EntradaVaciaError
from .comandos import leer_config, validar_config
from .evaluacion import (
    emparejar_doas, error_doa, eval_association_counts, eval_baseline, eval_confusion, eval_doa_cdf,
    particion_correcta, tasas_de_orden,
)
from .pipeline import ETIQUETA_SOBRECARGADA, EstimadorMDL, EstimadorOraculo, run_pipeline


def escena(fuentes, snr_db=None, sps=4, n=200):
    """Fuentes como listas de (az°, el°, retardo); snr_db=None deja la escena sin ruido."""
    caminos = tuple(
        tuple(Trayecto(DirectionPair.desde_grados(az, el), retardo, 0.0) for az, el, retardo in f)
        for f in fuentes
    )
    conteos = [len(f) for f in caminos]
    n_S, n_M, n_P = len(conteos), sum(conteos), max(conteos)
    etiqueta = (ModelOrderLabel(n_S, n_M, n_P, encode_label(n_S, n_M, n_P)) if n_M <= 5
                else ModelOrderLabel(n_S, n_M, n_P, 19))
    return Scenario(
        label=etiqueta, paths=caminos, source_seeds=tuple(range(101, 101 + n_S)),
        los_snr=math.inf if snr_db is None else snr_db,
        noise_variance=0.0 if snr_db is None else 10 ** (-snr_db / 10),
        samples_per_block=n, samples_per_symbol=sps,
    )


class PipelineTests(SimpleTestCase):
    def setUp(self):
        self.geom = ArrayGeometry.uca()

    def test_clase_1_con_oraculo(self):
        escenario = escena([[(70, 40, 0)]], snr_db=20)
        bloques = synthesize_blocks(escenario, self.geom, 3, np.random.default_rng(0))
        reporte = run_pipeline(bloques, self.geom, EstimadorOraculo(escenario.label))
        self.assertEqual(reporte.bloques_suavizado, 2)
        self.assertEqual(len(reporte.doas), 1)
        self.assertEqual(reporte.partition, ((0,),))
        self.assertLess(math.degrees(error_doa(reporte.doas, escenario.direcciones(), True)), 2.0)

    def test_dos_fuentes_con_multitrayecto(self):
        rng = np.random.default_rng(5)
        aciertos = 0
        for _ in range(20):
            escenario = escena([[(40, 50, 0), (160, 70, 2)], [(280, 60, 0)]], snr_db=20)
            bloques = synthesize_blocks(escenario, self.geom, 5, rng)
            reporte = run_pipeline(bloques, self.geom, EstimadorOraculo(escenario.label))
            self.assertEqual(reporte.bloques_suavizado, 3)
            pares = emparejar_doas(reporte.doas, escenario.direcciones(), plegar=True)
            cerca = len(pares) == 3 and all(math.degrees(d) <= 5.0 for _, _, d in pares)
            aciertos += cerca and particion_correcta(reporte, escenario, plegar=True)
        self.assertGreaterEqual(aciertos, 16)

    def test_sobrecargada_omite_music(self):
        escenario = escena([[(10, 30, 0)], [(100, 60, 0)]], snr_db=10)
        bloques = synthesize_blocks(escenario, self.geom, 1, np.random.default_rng(1))
        reporte = run_pipeline(bloques, self.geom, EstimadorOraculo(ETIQUETA_SOBRECARGADA))
        self.assertTrue(reporte.sobrecargada)
        self.assertEqual(reporte.doas, ())
        self.assertEqual(reporte.bloques_suavizado, 0)
        self.assertNotIn('music', reporte.tiempos)

    def test_bloques_insuficientes(self):
        escenario = escena([[(10, 30, 0), (100, 60, 3)]], snr_db=10)
        bloques = synthesize_blocks(escenario, self.geom, 3, np.random.default_rng(2))
        with self.assertRaises(BloquesInsuficientesError) as ctx:
            run_pipeline(bloques, self.geom, EstimadorOraculo(escenario.label))
        self.assertEqual(ctx.exception.requeridos, 5)

    def test_sin_bloques(self):
        with self.assertRaises(EntradaVaciaError):
            run_pipeline([], self.geom, EstimadorOraculo(ModelOrderLabel(1, 1, 1, 1)))

    def test_resumen_sin_tiempos(self):
        escenario = escena([[(200, 80, 0)]], snr_db=10)
        bloques = synthesize_blocks(escenario, self.geom, 3, np.random.default_rng(3))
        reporte = run_pipeline(bloques, self.geom, EstimadorOraculo(escenario.label), conservar_espectro=True)
        self.assertNotIn('tiempos', reporte.como_dict())
        self.assertEqual(set(reporte.tiempos), {'moe', 'suavizado', 'music', 'filtrado', 'asociacion'})
        self.assertEqual(reporte.espectro.valores.shape, (180, 360))

    def test_estimador_mdl_fuentes_independientes(self):
        a = steering_matrix(self.geom, [DirectionPair.desde_grados(40, 50), DirectionPair.desde_grados(220, 80)])
        cov = CovarianceMatrix(entries=a @ a.conj().T + 0.1 * np.eye(6), snapshot_count=200)
        self.assertEqual(mdl_estimate(cov, 200), 2)
        self.assertEqual(EstimadorMDL()(cov), ModelOrderLabel(2, 2, 1, encode_label(2, 2, 1)))

    def test_estimador_mdl_sin_fuentes(self):
        cov = CovarianceMatrix(entries=np.eye(6, dtype=complex), snapshot_count=200)
        self.assertEqual(EstimadorMDL()(cov).class18, 1)


class EmparejamientoTests(SimpleTestCase):
    def test_voraz_por_distancia(self):
        verdad = [DirectionPair.desde_grados(0, 45), DirectionPair.desde_grados(90, 45)]
        estimadas = [DirectionPair.desde_grados(91, 45), DirectionPair.desde_grados(1, 45)]
        pares = emparejar_doas(estimadas, verdad)
        self.assertEqual({(i, j) for i, j, _ in pares}, {(0, 1), (1, 0)})

    def test_falta_una_estimacion(self):
        verdad = [DirectionPair.desde_grados(0, 45), DirectionPair.desde_grados(90, 45)]
        self.assertAlmostEqual(error_doa([verdad[0]], verdad), math.pi / 2, places=9)

    def test_plegado_especular(self):
        arriba = DirectionPair.desde_grados(40, 60)
        abajo = DirectionPair.desde_grados(40, 120)
        self.assertAlmostEqual(error_doa([arriba], [abajo], plegar=True), 0.0, places=9)
        self.assertGreater(error_doa([arriba], [abajo], plegar=False), 1.0)

    def test_sin_verdad(self):
        with self.assertRaises(EntradaVaciaError):
            error_doa([], [])


class EvalConfusionTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = tempfile.TemporaryDirectory()
        ruta = os.path.join(cls.tmp.name, 'd.bin')
        generate_dataset(ScenarioConfig(), 60, 3, ruta, ArrayGeometry.uca())
        cls.dataset = read_dataset(ruta)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()
        super().tearDownClass()

    def reales(self):
        return self.dataset[1]['class18'].astype(int)

    def test_oraculo_diagonal(self):
        reales = self.reales()
        reporte = eval_confusion(self.dataset, lambda x: reales, 'eighteen')
        self.assertEqual(reporte.confusion.shape, (18, 18))
        self.assertEqual(reporte.accuracy, 1.0)
        self.assertEqual(np.count_nonzero(reporte.confusion - np.diag(np.diag(reporte.confusion))), 0)
        np.testing.assert_array_equal(reporte.confusion.sum(axis=1), np.bincount(reales - 1, minlength=18))

    def test_siempre_clase_1(self):
        reporte = eval_confusion(self.dataset, lambda x: np.ones(len(x), dtype=int), 'nine')
        np.testing.assert_array_equal(reporte.confusion[:, 0], reporte.confusion.sum(axis=1))

    def test_agrupar_no_reduce_exactitud(self):
        rng = np.random.default_rng(0)
        predichas = rng.integers(1, 19, size=len(self.reales()))
        exactitud = {t: eval_confusion(self.dataset, lambda x: predichas, t).accuracy
                     for t in ('five', 'nine', 'eighteen')}
        self.assertGreaterEqual(exactitud['five'], exactitud['nine'])
        self.assertGreaterEqual(exactitud['nine'], exactitud['eighteen'])

    def test_bins_de_snr_y_campo_de_vision(self):
        reales = self.reales()
        reporte = eval_confusion(self.dataset, lambda x: reales, 'five')
        self.assertEqual(sum(b['count'] for b in reporte.por_snr), 60)
        elevacion = [b for b in reporte.por_fov if b['eje'] == 'elevation']
        azimut = [b for b in reporte.por_fov if b['eje'] == 'azimuth']
        self.assertEqual((len(elevacion), len(azimut)), (6, 12))
        self.assertEqual(sum(b['count'] for b in azimut), 60)

    def test_sobrecarga_agrega_fila(self):
        reales = self.reales()
        reporte = eval_confusion(self.dataset, lambda x: reales, 'five', sobrecarga=True)
        self.assertEqual(reporte.confusion.shape, (6, 6))

    def test_tasas_de_orden(self):
        tasas = tasas_de_orden([1, 3, 19], [2, 1, 4])
        self.assertEqual(tasas, {'n_m_under': 0.5, 'n_m_over': 0.5, 'n_p_under': 0.0, 'n_p_over': 0.5})

    def test_linea_base(self):
        resultado = eval_baseline(self.dataset)
        for nombre in ('aic', 'mdl'):
            self.assertEqual(resultado[nombre]['confusion'].sum(), 60)
            self.assertTrue(0.0 <= resultado[nombre]['accuracy'] <= 1.0)
            self.assertEqual(resultado[nombre]['recortes'], 0)

    def test_linea_base_cuenta_recortes(self):
        meta, registros = self.dataset
        registros = registros.copy()
        registros['feature'][:2] = 0.0
        resultado = eval_baseline((meta, registros))
        for nombre in ('aic', 'mdl'):
            self.assertEqual(resultado[nombre]['recortes'], 2)


class EvalDoaTests(SimpleTestCase):
    def test_oraculo_sin_ruido_alineado_a_la_grilla(self):
        geom = ArrayGeometry.uca()
        rng = np.random.default_rng(0)
        escenas = []
        for az, el in ((30, 40), (150, 70), (300, 20), (75, 85)):
            escenario = escena([[(az, el, 0)]])
            escenas.append((escenario, synthesize_blocks(escenario, geom, 3, rng)))
        resultado = eval_doa_cdf(escenas, 'oracle', geom)
        self.assertEqual(resultado['count'], 4)
        self.assertLess(resultado['quantiles'][0.9], 1.0)
        self.assertEqual(resultado['partition_accuracy'], 1.0)

    def test_cuantiles_monotonos(self):
        geom = ArrayGeometry.uca()
        rng = np.random.default_rng(1)
        escenas = []
        for k in range(6):
            escenario = escena([[(40 * k + 10, 30 + 8 * k, 0)]], snr_db=0)
            escenas.append((escenario, synthesize_blocks(escenario, geom, 3, rng)))
        cuantiles = list(eval_doa_cdf(escenas, 'oracle', geom, workers=2)['quantiles'].values())
        self.assertEqual(cuantiles, sorted(cuantiles))

    def test_modelo_sin_red(self):
        geom = ArrayGeometry.uca()
        escenario = escena([[(30, 40, 0)]])
        with self.assertRaises(ValueError):
            eval_doa_cdf([(escenario, synthesize_blocks(escenario, geom, 3, np.random.default_rng(0)))],
                         'model', geom)


class EvalAssociationCountsTests(SimpleTestCase):
    def test_tabla(self):
        tabla = eval_association_counts(trials=300, seed=0)
        self.assertEqual(sorted(tabla), [1, 2, 3, 4, 5])
        self.assertEqual(tabla[2]['enhanced'], 0.0)
        self.assertAlmostEqual(tabla[3]['enhanced_exhaustive'], 5 / 9, places=9)
        self.assertAlmostEqual(tabla[3]['enhanced'], 0.6, delta=0.3)
        self.assertLessEqual(tabla[4]['greedy_worst'], 6)
        for fila in tabla.values():
            self.assertLessEqual(fila['enhanced'], fila['greedy'])


class ConfigArchivoTests(SimpleTestCase):
    def test_lectura_y_validacion(self):
        from apps.canal.serializers import ScenarioConfigSerializer
        with tempfile.TemporaryDirectory() as tmp:
            ruta = Path(tmp) / 'c.txt'
            ruta.write_text("# escena\nsnr_range = 0,10\n\nclasses=1-6  # reducidas\n", encoding='utf-8')
            config, = validar_config(leer_config(ruta), ScenarioConfigSerializer)
        self.assertEqual(config.snr_range, (0.0, 10.0))
        self.assertEqual(config.classes, (1, 2, 3, 4, 5, 6))

    def test_sin_archivo(self):
        self.assertEqual(leer_config(None), {})


def ejecutar(nombre, **opciones):
    salida, errores = StringIO(), StringIO()
    call_command(nombre, stdout=salida, stderr=errores, **opciones)
    return json.loads(salida.getvalue().strip().splitlines()[-1])


class ComandosTests(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def config(self, texto):
        ruta = self.tmp / 'config.txt'
        ruta.write_text(texto, encoding='utf-8')
        return str(ruta)

    def test_gen_dataset_determinista_y_auditado(self):
        config = self.config("classes=1-3\nsamples_per_block=64\n")
        a = ejecutar('gen_dataset', config=config, seed=7, count=20, out=str(self.tmp / 'a'))
        b = ejecutar('gen_dataset', config=config, seed=7, count=20, out=str(self.tmp / 'b'))
        self.assertEqual((self.tmp / 'a' / 'dataset.bin').read_bytes(), (self.tmp / 'b' / 'dataset.bin').read_bytes())
        self.assertEqual(a['digest'], b['digest'])
        registro = Bitacora.objects.filter(accion='gen_dataset').first()
        self.assertEqual(registro.semilla, 7)
        self.assertEqual(registro.digest, a['digest'])
        self.assertEqual(registro.extra['count'], 20)

    def test_clave_desconocida(self):
        errores = StringIO()
        with self.assertRaises(CommandError):
            call_command('gen_dataset', config=self.config("color=azul\n"), count=5, out=str(self.tmp),
                         stdout=StringIO(), stderr=errores)
        self.assertIn('color', json.loads(errores.getvalue().strip())['error'])
        self.assertFalse(Bitacora.objects.exists())

    def test_linea_mal_formada(self):
        with self.assertRaises(CommandError):
            call_command('gen_dataset', config=self.config("snr_range\n"), count=5, out=str(self.tmp),
                         stdout=StringIO(), stderr=StringIO())

    def test_entrenar_evaluar_y_linea_base(self):
        ejecutar('gen_dataset', config=self.config("classes=1-3\n"), seed=1, count=24, out=str(self.tmp))
        dataset = str(self.tmp / 'dataset.bin')
        config = self.config("epochs=1\nbatch=8\n")
        for sub in ('t1', 't2'):
            resumen = ejecutar('train', dataset=dataset, config=config, seed=3, loss='weighted',
                               out=str(self.tmp / sub))
        self.assertEqual(resumen['loss'], 'weighted_ce')
        self.assertEqual((self.tmp / 't1' / 'checkpoint.ckpt').read_bytes(),
                         (self.tmp / 't2' / 'checkpoint.ckpt').read_bytes())
        self.assertTrue((self.tmp / 't1' / 'train_history.csv').exists())

        ejecutar('eval_moe', dataset=dataset, checkpoint=str(self.tmp / 't1' / 'checkpoint.ckpt'), task=5,
                 out=str(self.tmp / 'e'))
        filas = (self.tmp / 'e' / 'confusion_5.csv').read_text().splitlines()
        self.assertEqual(len(filas), 6)
        self.assertTrue((self.tmp / 'e' / 'accuracy_vs_snr.csv').exists())

        resumen = ejecutar('eval_moe', dataset=dataset, mdl=True, task=18, out=str(self.tmp / 'm'))
        self.assertIn('accuracy', resumen)
        resumen = ejecutar('baseline', dataset=dataset, out=str(self.tmp / 'b'))
        self.assertEqual(resumen['count'], 24)
        self.assertEqual((resumen['aic_clipped'], resumen['mdl_clipped']), (0, 0))
        self.assertEqual(Bitacora.objects.count(), 6)

    def test_eval_moe_sin_modelo(self):
        ejecutar('gen_dataset', seed=1, count=5, out=str(self.tmp))
        with self.assertRaises(CommandError):
            call_command('eval_moe', dataset=str(self.tmp / 'dataset.bin'), out=str(self.tmp),
                         stdout=StringIO(), stderr=StringIO())

    def test_eval_assoc(self):
        resumen = ejecutar('eval_assoc', trials=100, out=str(self.tmp))
        self.assertEqual(resumen['table']['2']['enhanced'], 0.0)
        filas = (self.tmp / 'association_counts.csv').read_text().splitlines()
        self.assertEqual(filas[0].split(','), ['n_m', 'greedy', 'enhanced', 'greedy_worst',
                                               'greedy_exhaustive', 'enhanced_exhaustive'])

    def test_eval_doa_oraculo(self):
        config = self.config("classes=1\nsnr_range=10,10\n")
        resumen = ejecutar('eval_doa', config=config, scenarios=5, seed=2, out=str(self.tmp))
        self.assertEqual(resumen['count'], 5)
        self.assertEqual(resumen['snr_range'], [10.0, 10.0])
        self.assertTrue((self.tmp / 'doa_cdf_oracle.csv').exists())

    def test_run_con_espectro(self):
        resumen = ejecutar('run', clase=1, seed=4, spectrum=True, out=str(self.tmp))
        self.assertEqual(resumen['estimate']['smoothing_blocks'], 2)
        self.assertEqual(len(resumen['estimate']['doas_deg']), 1)
        self.assertIn('tiempos', resumen)
        self.assertTrue((self.tmp / 'spectrum.txt').exists())
        reporte = json.loads((self.tmp / 'run_report.json').read_text())
        self.assertNotIn('tiempos', reporte)

    def test_run_sobrecargado(self):
        resumen = ejecutar('run', clase=19, seed=4, out=str(self.tmp))
        self.assertTrue(resumen['estimate']['overloaded'])
        self.assertEqual(resumen['estimate']['doas_deg'], [])

    def test_semilla_negativa(self):
        with self.assertRaises(CommandError):
            call_command('eval_assoc', seed=-1, out=str(self.tmp), stdout=StringIO(), stderr=StringIO())
