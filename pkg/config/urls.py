from django.contrib import admin
from django.urls import path, include

from rest_framework import permissions
from drf_yasg.views import get_schema_view
from drf_yasg import openapi

# --- Configuración base del esquema ---
schema_view = get_schema_view(
    openapi.Info(
        title="DoA-MOE API",
        default_version='v1',
        description="Bitácora de ejecuciones del simulador de orden de modelo y dirección de llegada",
        license=openapi.License(name="Private License"),
    ),
    public=True,
    permission_classes=(permissions.AllowAny,),
    authentication_classes=[],
)


urlpatterns = [
    path('admin/', admin.site.urls),

    # --- Documentación ---
    path('swagger/', schema_view.with_ui('swagger', cache_timeout=0), name='schema-swagger-ui'),
    path('redoc/', schema_view.with_ui('redoc', cache_timeout=0), name='schema-redoc'),

    # --- API principal ---
    path('api/v1/', include([
        path('auditoria/', include('apps.auditoria.urls')),
    ])),
]
