from django.apps import AppConfig


class DoaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.doa'
    verbose_name = 'Estimación de direcciones de llegada (MUSIC)'
