from django.apps import AppConfig


class OrdenConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.orden'
    verbose_name = 'Estimación clásica del orden del modelo'
