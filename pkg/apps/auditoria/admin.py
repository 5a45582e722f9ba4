from django.contrib import admin

from .models import Bitacora


@admin.register(Bitacora)
class BitacoraAdmin(admin.ModelAdmin):
    list_display = ('timestamp', 'accion', 'semilla', 'objeto')
    list_filter = ('accion',)
    search_fields = ('objeto', 'digest')
    readonly_fields = ('accion', 'objeto', 'semilla', 'digest', 'extra', 'timestamp')
