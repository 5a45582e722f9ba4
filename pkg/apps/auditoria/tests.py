from unittest import mock

from django.contrib.auth import get_user_model
from django.test import TestCase
from rest_framework.test import APIClient

from .models import Bitacora
from .utils import log_action

URL = '/api/v1/auditoria/bitacoras/'


class LogActionTests(TestCase):
    def test_crea_registro(self):
        registro = log_action('train', objeto='/tmp/checkpoint.ckpt', semilla=3, digest='ab' * 32,
                              extra={'epochs': 2})
        self.assertEqual(Bitacora.objects.count(), 1)
        self.assertEqual(registro.extra, {'epochs': 2})
        self.assertIn('train', str(registro))

    def test_nunca_lanza(self):
        with mock.patch.object(Bitacora.objects, 'create', side_effect=RuntimeError("sin base")):
            with self.assertLogs('apps.auditoria.utils', level='ERROR'):
                self.assertIsNone(log_action('run'))


class BitacoraApiTests(TestCase):
    def setUp(self):
        self.cliente = APIClient()
        for k, accion in enumerate(('gen_dataset', 'train', 'eval_moe')):
            log_action(accion, objeto=f"/salidas/{accion}", semilla=k)

    def test_requiere_administrador(self):
        self.assertIn(self.cliente.get(URL).status_code, (401, 403))
        usuario = get_user_model().objects.create_user('lector', password='x-clave-larga')
        self.cliente.force_authenticate(usuario)
        self.assertEqual(self.cliente.get(URL).status_code, 403)

    def test_listado_paginado_y_busqueda(self):
        admin = get_user_model().objects.create_user('admin', password='x-clave-larga', is_staff=True)
        self.cliente.force_authenticate(admin)
        datos = self.cliente.get(URL, {'page_size': 2}).json()
        self.assertEqual(datos['count'], 3)
        self.assertEqual(datos['paginas'], 2)
        self.assertEqual(len(datos['results']), 2)

        datos = self.cliente.get(URL, {'search': 'train'}).json()
        self.assertEqual([r['accion'] for r in datos['results']], ['train'])

        datos = self.cliente.get(URL, {'ordering': 'semilla'}).json()
        self.assertEqual([r['semilla'] for r in datos['results']], [0, 1, 2])

    def test_solo_lectura(self):
        admin = get_user_model().objects.create_user('admin', password='x-clave-larga', is_staff=True)
        self.cliente.force_authenticate(admin)
        self.assertEqual(self.cliente.post(URL, {'accion': 'x'}).status_code, 405)
