from django.db import models


# Registro de cada ejecución de un comando de la línea de órdenes
class Bitacora(models.Model):
    accion = models.CharField(max_length=50, db_index=True, help_text="Comando ejecutado (gen_dataset, train, ...)")
    objeto = models.CharField(max_length=500, null=True, blank=True, help_text="Ruta del artefacto principal")
    semilla = models.BigIntegerField(null=True, blank=True)
    digest = models.CharField(max_length=64, null=True, blank=True, help_text="SHA-256 del artefacto principal")
    extra = models.JSONField(null=True, blank=True, help_text="Configuración usada y métricas resumen")
    timestamp = models.DateTimeField(auto_now_add=True, db_index=True)

    class Meta:
        ordering = ['-timestamp']
        verbose_name = 'Registro de bitácora'
        verbose_name_plural = 'Bitácoras'

    def __str__(self):
        semilla = f" [semilla {self.semilla}]" if self.semilla is not None else ""
        return f"{self.timestamp.isoformat()} {self.accion}{semilla} {self.objeto or ''}".rstrip()
