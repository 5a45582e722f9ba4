from django.apps import AppConfig


class CovarianzaConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.covarianza'
