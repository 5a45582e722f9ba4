"""
Punto de entrada WSGI del servicio de consulta de la bitácora (`/api/v1/auditoria/`).

Los comandos de simulación y evaluación no pasan por aquí; se ejecutan con
`python manage.py <comando>`.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

application = get_wsgi_application()
