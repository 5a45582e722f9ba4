from django.apps import AppConfig


class AsociacionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.asociacion'
    verbose_name = 'Filtrado espacial y asociación de señales'
