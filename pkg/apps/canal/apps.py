from django.apps import AppConfig


class CanalConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.canal'
    verbose_name = 'Simulación de canal multitrayecto y datasets'
