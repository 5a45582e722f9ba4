import math
import os
import tempfile

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from config.exceptions import (
    ArchivoError, EntradaVaciaError, EntrenamientoFallidoError, EstadoInvalidoError, FormaInvalidaError,
    FueraDeRangoError,
)
from .capas import BatchNorm, Conv2D, Dense, Dropout, Flatten, MaxPool2D, Ramas, ReLU, Residual, Secuencial
from .checkpoint import load_checkpoint, save_checkpoint
from .entrenamiento import TrainConfig, train
from .gradientes import gradient_check
from .perdidas import LossSpec, loss_standard_ce, loss_weighted_ce, pesos_orden
from .red import Red, build_mlp, build_rcnn, predict, softmax
from .serializers import TrainConfigSerializer

TOLERANCIA = 1e-4


def datos_separables(n=200, E=6, semilla=0):
    """Dos clases de covarianzas de juguete separadas por el signo de la diagonal."""
    rng = np.random.default_rng(semilla)
    etiquetas = rng.integers(1, 3, size=n)
    signo = np.where(etiquetas == 1, 1.0, -1.0)
    x = 0.1 * rng.standard_normal((n, E, E, 2))
    x[:, np.arange(E), np.arange(E), 0] += signo[:, None]
    return x.astype(np.float32), etiquetas


def copia_parametros(red):
    return [valor.copy() for _, valor, _ in red.parametros()]


class GradienteCapasTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)

    def assertGradienteCorrecto(self, modulo, x, **kwargs):
        errores = gradient_check(modulo, x, **kwargs)
        for nombre, error in errores.items():
            self.assertLess(error, TOLERANCIA, msg=nombre)

    def test_conv_asimetrica(self):
        self.assertGradienteCorrecto(Conv2D(2, 3, (1, 3)), self.rng.standard_normal((4, 2, 5, 5)))
        self.assertGradienteCorrecto(Conv2D(2, 3, (3, 1)), self.rng.standard_normal((4, 2, 5, 5)))

    def test_conv_agrupada(self):
        self.assertGradienteCorrecto(Conv2D(4, 4, (3, 1), grupos=2), self.rng.standard_normal((2, 4, 4, 4)))

    def test_densa(self):
        self.assertGradienteCorrecto(Dense(5, 3), self.rng.standard_normal((4, 5)))

    def test_batchnorm(self):
        self.assertGradienteCorrecto(BatchNorm(3), self.rng.standard_normal((4, 3, 3, 3)))
        self.assertGradienteCorrecto(BatchNorm(4), self.rng.standard_normal((6, 4)))

    def test_relu_lejos_del_codo(self):
        x = self.rng.uniform(0.1, 1.0, (4, 6)) * self.rng.choice([-1.0, 1.0], (4, 6))
        self.assertGradienteCorrecto(ReLU(), x)

    def test_maxpool_sin_empates(self):
        x = self.rng.permutation(4 * 2 * 5 * 5).reshape(4, 2, 5, 5) * 0.01
        self.assertGradienteCorrecto(MaxPool2D(), x)

    def test_dropout_con_semilla_fija(self):
        self.assertGradienteCorrecto(Dropout(0.5), self.rng.standard_normal((4, 8)))

    def test_residual_y_ramas(self):
        self.assertGradienteCorrecto(Residual(Conv2D(3, 3, (3, 3))), self.rng.standard_normal((2, 3, 4, 4)))
        ramas = Ramas([Secuencial([Conv2D(2, 2, (1, 3))]), Secuencial([Conv2D(2, 3, (3, 1))])])
        self.assertGradienteCorrecto(ramas, self.rng.standard_normal((2, 2, 4, 4)))

    def test_red_pequena_suave(self):
        red = Secuencial([BatchNorm(2), Conv2D(2, 3, (1, 3)), Flatten(), Dense(27, 4)])
        self.assertGradienteCorrecto(red, self.rng.standard_normal((4, 2, 3, 3)), eps=1e-3)

    def test_rcnn_compuesta_ancho_reducido(self):
        red = build_rcnn(18, 6, canales=2, ocultas=8, semilla=3)
        x = self.rng.standard_normal((4, 6, 6, 2))
        self.assertGradienteCorrecto(red, x, eps=1e-7, max_entradas=8)


class PropiedadesBackwardTests(SimpleTestCase):
    def setUp(self):
        self.red = build_rcnn(18, 6, canales=2, ocultas=8)
        self.x = np.random.default_rng(1).standard_normal((3, 6, 6, 2))

    def gradientes(self, grad):
        self.red.reseed(0)
        self.red.forward(self.x, entrenamiento=True)
        self.red.backward(grad)
        return [g.astype(np.float64).copy() for _, _, g in self.red.parametros()]

    def test_gradiente_nulo(self):
        for g in self.gradientes(np.zeros((3, 18))):
            self.assertFalse(np.any(g))

    def test_homogeneidad(self):
        grad = np.random.default_rng(2).standard_normal((3, 18))
        simples = self.gradientes(grad)
        dobles = self.gradientes(2 * grad)
        for a, b in zip(simples, dobles):
            np.testing.assert_allclose(b, 2 * a, rtol=1e-4, atol=1e-6)

    def test_backward_sin_forward(self):
        red = build_mlp(18, 6)
        with self.assertRaises(EstadoInvalidoError):
            red.backward(np.zeros((1, 18)))

    def test_forma_incorrecta(self):
        with self.assertRaises(FormaInvalidaError):
            self.red.forward(np.zeros((2, 5, 5, 2)))


class BuildRcnnTests(SimpleTestCase):
    def test_conteo_de_parametros(self):
        red = build_rcnn(18, 6)
        ramas = 2 * ((2 * 1 * 3 * 8 + 8) + 2 * 8)
        residual = 16 * 16 * 9 + 16
        agrupadas = 2 * (16 * 8 * 3 + 16)
        densas = (16 * 6 * 6 * 128 + 128) + (128 * 18 + 18)
        self.assertEqual(red.count_parameters(), ramas + residual + agrupadas + densas)
        self.assertEqual(red.count_parameters(), 79442)

    def test_forma_de_salida(self):
        red = build_rcnn(19, 12, canales=2, ocultas=8)
        for lote in (1, 3):
            self.assertEqual(red.forward(np.zeros((lote, 12, 12, 2))).shape, (lote, 19))

    def test_ceros_en_inferencia(self):
        red = build_rcnn(18, 6)
        a = red.forward(np.zeros((2, 6, 6, 2)))
        b = red.forward(np.zeros((2, 6, 6, 2)))
        self.assertTrue(np.all(np.isfinite(a)))
        np.testing.assert_array_equal(a, b)

    def test_e_no_soportado(self):
        with self.assertRaises(FueraDeRangoError):
            build_rcnn(18, 8)
        with self.assertRaises(FueraDeRangoError):
            build_rcnn(17, 6)

    def test_residual_identidad(self):
        conv = Conv2D(4, 4, (3, 3))
        conv.params['W'][...] = 0.0
        x = np.random.default_rng(0).standard_normal((2, 4, 6, 6)).astype(np.float32)
        np.testing.assert_array_equal(Residual(conv).forward(x), x)

    def test_batchnorm_inferencia_con_estadisticas_del_lote(self):
        bn = BatchNorm(3, momento=1.0)
        x = np.random.default_rng(4).standard_normal((8, 3, 4, 4))
        bn.to_dtype(np.float64)
        entrenamiento = bn.forward(x, entrenamiento=True)
        np.testing.assert_allclose(bn.forward(x, entrenamiento=False), entrenamiento, atol=1e-10)


class BuildMlpTests(SimpleTestCase):
    def test_conteo_cerrado(self):
        ocultas = [256, 1024, 512, 256, 128, 64]
        capas = [72] + ocultas + [18]
        esperado = sum((a + 1) * b for a, b in zip(capas[:-1], capas[1:])) + 2 * sum(ocultas)
        self.assertEqual(build_mlp(18, 6).count_parameters(), esperado)

    def test_inferencia_determinista(self):
        red = build_mlp(18, 6)
        x = np.random.default_rng(0).standard_normal((4, 6, 6, 2))
        np.testing.assert_array_equal(red.forward(x), red.forward(x))

    def test_dropout_cero_equivale_a_inferencia(self):
        red = build_mlp(18, 6, ocultas=(16, 8), dropout=0.0)
        red.to_dtype(np.float64)
        for hoja in red.hojas():
            if isinstance(hoja, BatchNorm):
                hoja.momento = 1.0
        x = np.random.default_rng(0).standard_normal((8, 6, 6, 2))
        red.forward(x, entrenamiento=True)
        np.testing.assert_allclose(red.forward(x, entrenamiento=True), red.forward(x), atol=1e-8)


class PerdidasTests(SimpleTestCase):
    def test_logits_uniformes(self):
        valor, _ = loss_standard_ce(np.zeros((1, 18)), [4])
        self.assertAlmostEqual(valor, math.log(18))

    def test_logit_dominante(self):
        logits = np.zeros((1, 18))
        logits[0, 2] = 80.0
        valor, _ = loss_standard_ce(logits, [3])
        self.assertLess(valor, 1e-30)

    def test_oraculo_directo(self):
        rng = np.random.default_rng(8)
        logits = rng.standard_normal((5, 18)) * 3
        clases = rng.integers(1, 19, size=5)
        valor, grad = loss_standard_ce(logits, clases)
        esperado = []
        for fila, c in zip(logits, clases):
            total = math.fsum(math.exp(v) for v in fila)
            esperado.append(math.log(total) - fila[c - 1])
        self.assertAlmostEqual(valor, math.fsum(esperado) / 5, places=12)
        uno = np.zeros_like(logits)
        uno[np.arange(5), clases - 1] = 1.0
        np.testing.assert_allclose(grad, (softmax(logits) - uno) / 5, atol=1e-12)

    def logits_con_argmax(self, clase):
        logits = np.zeros((1, 18))
        logits[0, clase - 1] = 2.0
        return logits

    def test_ponderada_sin_error(self):
        config_perdida = LossSpec()
        logits = self.logits_con_argmax(5)
        self.assertAlmostEqual(loss_weighted_ce(logits, [5], config_perdida)[0], loss_standard_ce(logits, [5])[0])

    def test_subestimacion_penaliza_mas(self):
        config_perdida = LossSpec()
        logits = self.logits_con_argmax(2)
        ce = loss_standard_ce(logits, [5])[0]
        valor = loss_weighted_ce(logits, [5], config_perdida)[0]
        self.assertAlmostEqual(valor, 0.5 * (math.exp(1.5) + 1.0) * ce)
        self.assertGreater(valor, ce)

    def test_sobreestimacion_penaliza_menos(self):
        config_perdida = LossSpec()
        logits = self.logits_con_argmax(5)
        ce = loss_standard_ce(logits, [2])[0]
        valor = loss_weighted_ce(logits, [2], config_perdida)[0]
        self.assertAlmostEqual(valor, 0.5 * (math.exp(-1.5) + 1.0) * ce)
        self.assertLess(valor, ce)

    def test_pesos_monotonos(self):
        config_perdida = LossSpec()
        pesos = pesos_orden([12] * 5, [1, 2, 4, 7, 12], config_perdida)
        self.assertTrue(np.all(np.diff(pesos) < 0))
        self.assertEqual(pesos[-1], 1.0)

    def test_clase_sobrecargada_sin_peso(self):
        self.assertEqual(pesos_orden([19], [3], LossSpec())[0], 1.0)

    def test_orden_de_k(self):
        with self.assertRaises(FueraDeRangoError):
            LossSpec(k1=4.0, k2=1.5)
        with self.assertRaises(FueraDeRangoError):
            LossSpec(k1=0.5, k2=4.0)

    def test_clase_invalida(self):
        with self.assertRaises(FueraDeRangoError):
            loss_weighted_ce(np.zeros((1, 18)), [19], LossSpec())


class PredictTests(SimpleTestCase):
    def test_probabilidades_suman_uno(self):
        red = build_rcnn(18, 6, canales=2, ocultas=8)
        _, probabilidades = predict(red, np.random.default_rng(0).standard_normal((5, 6, 6, 2)))
        np.testing.assert_allclose(probabilidades.sum(axis=1), 1.0, atol=1e-9)

    def test_invariante_a_desplazamiento(self):
        logits = np.random.default_rng(3).standard_normal((4, 18))
        np.testing.assert_allclose(softmax(logits + 7.5), softmax(logits), atol=1e-12)

    def test_empates_a_la_clase_menor(self):
        red = build_mlp(18, 6, ocultas=(8,))
        ultima = red.hojas()[-1]
        ultima.params['W'][...] = 0.0
        clases, _ = predict(red, np.ones((2, 6, 6, 2)))
        np.testing.assert_array_equal(clases, [1, 1])


class TrainTests(SimpleTestCase):
    def test_toy_separable(self):
        x, y = datos_separables()
        red = build_rcnn(18, 6, semilla=1)
        config = TrainConfig(lr=3e-3, batch=32, epochs=20, seed=1, loss_spec=LossSpec('standard_ce'),
                             validation_fraction=0.0)
        reporte = train(red, x, y, config)
        self.assertGreaterEqual(reporte.final['train_accuracy'], 0.99)
        self.assertEqual(len(reporte.epocas), 20)
        self.assertIsNone(reporte.final['validation_accuracy'])

    def test_lr_cero_no_cambia_parametros(self):
        x, y = datos_separables(40)
        red = build_rcnn(18, 6, canales=2, ocultas=8)
        antes = copia_parametros(red)
        train(red, x, y, TrainConfig(lr=0.0, batch=8, epochs=2))
        for a, (_, b, _) in zip(antes, red.parametros()):
            np.testing.assert_array_equal(a, b)

    def test_misma_semilla_mismos_parametros(self):
        x, y = datos_separables(40)
        finales = []
        for _ in range(2):
            red = build_rcnn(18, 6, canales=2, ocultas=8, semilla=4)
            train(red, x, y, TrainConfig(batch=8, epochs=2, seed=9))
            finales.append(copia_parametros(red))
        for a, b in zip(*finales):
            np.testing.assert_array_equal(a, b)

    def test_divergencia(self):
        x, y = datos_separables(16)
        x[0, 0, 0, 0] = np.nan
        with self.assertRaises(EntrenamientoFallidoError) as ctx:
            train(build_mlp(18, 6, ocultas=(8,)), x, y, TrainConfig(batch=16, epochs=3, validation_fraction=0.0))
        self.assertEqual(ctx.exception.epoca, 1)

    def test_dataset_vacio(self):
        with self.assertRaises(EntradaVaciaError):
            train(build_mlp(18, 6), np.zeros((0, 6, 6, 2)), np.zeros(0), TrainConfig())

    def test_etiquetas_fuera_de_rango(self):
        x, _ = datos_separables(4)
        with self.assertRaises(FueraDeRangoError):
            train(build_mlp(18, 6), x, np.array([1, 2, 19, 3]), TrainConfig())


class CheckpointTests(SimpleTestCase):
    def setUp(self):
        self.dir = tempfile.TemporaryDirectory()
        self.addCleanup(self.dir.cleanup)
        self.ruta = os.path.join(self.dir.name, 'modelo.ckpt')

    def test_ida_y_vuelta(self):
        x, y = datos_separables(24)
        red = build_rcnn(19, 6, canales=2, ocultas=8)
        reporte = train(red, x, y, TrainConfig(batch=8, epochs=1))
        save_checkpoint(self.ruta, red, reporte.optimizador)
        cargada, optimizador, meta = load_checkpoint(self.ruta)
        self.assertIsInstance(cargada, Red)
        self.assertEqual((meta['num_classes'], meta['E']), (19, 6))
        self.assertEqual(optimizador.t, reporte.optimizador.t)
        np.testing.assert_array_equal(cargada.forward(x[:4]), red.forward(x[:4]))
        for a, b in zip(optimizador.m, reporte.optimizador.m):
            np.testing.assert_array_equal(a, b)

    def test_mlp_sin_optimizador(self):
        red = build_mlp(18, 6, ocultas=(16, 8))
        save_checkpoint(self.ruta, red)
        cargada, optimizador, _ = load_checkpoint(self.ruta)
        self.assertIsNone(optimizador)
        self.assertEqual(cargada.count_parameters(), red.count_parameters())

    def test_truncado(self):
        save_checkpoint(self.ruta, build_mlp(18, 6, ocultas=(8,)))
        with open(self.ruta, 'rb') as f:
            contenido = f.read()
        with open(self.ruta, 'wb') as f:
            f.write(contenido[:-8])
        with self.assertRaises(ArchivoError):
            load_checkpoint(self.ruta)


class TrainConfigSerializerTests(SimpleTestCase):
    def test_valida(self):
        s = TrainConfigSerializer(data={'lr': '0.01', 'batch': '16', 'epochs': '3', 'loss': 'weighted_ce',
                                        'k1': '2', 'k2': '5'})
        self.assertTrue(s.is_valid(), s.errors)
        config = s.save()
        self.assertEqual(config.batch, 16)
        self.assertEqual((config.loss_spec.k1, config.loss_spec.k2), (2.0, 5.0))

    def test_k_invalidos(self):
        s = TrainConfigSerializer(data={'k1': '3', 'k2': '2'})
        self.assertFalse(s.is_valid())
        self.assertIn('k2', s.errors)

    def test_k_por_defecto_desde_ajustes(self):
        s = TrainConfigSerializer(data={})
        self.assertTrue(s.is_valid(), s.errors)
        base = s.save().loss_spec
        self.assertEqual((base.k1, base.k2), (1.5, 4.0))

        ajustes = {**settings.DOA, 'K1': 2.0, 'K2': 6.0}
        with override_settings(DOA=ajustes):
            s = TrainConfigSerializer(data={})
            self.assertTrue(s.is_valid(), s.errors)
            cambiada = s.save().loss_spec
        self.assertEqual((cambiada.k1, cambiada.k2), (2.0, 6.0))

        reales, estimadas = [12, 12, 12], [1, 4, 7]
        self.assertTrue(np.all(pesos_orden(reales, estimadas, cambiada) > pesos_orden(reales, estimadas, base)))

    def test_ajustes_invalidos_se_rechazan(self):
        with override_settings(DOA={**settings.DOA, 'K1': 5.0, 'K2': 4.0}):
            s = TrainConfigSerializer(data={})
            self.assertFalse(s.is_valid())
        self.assertIn('k2', s.errors)
