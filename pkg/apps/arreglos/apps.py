from django.apps import AppConfig


class ArreglosConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.arreglos'
    verbose_name = 'Geometrías de arreglos y vectores de dirección'
