from rest_framework import permissions, viewsets
from rest_framework.filters import OrderingFilter, SearchFilter

from config.pagination import PaginacionBitacora
from .models import Bitacora
from .serializers import BitacoraSerializer


class BitacoraViewSet(viewsets.ReadOnlyModelViewSet):
    """Lectura de las ejecuciones registradas (solo personal administrador)."""
    queryset = Bitacora.objects.all()
    serializer_class = BitacoraSerializer
    pagination_class = PaginacionBitacora
    permission_classes = [permissions.IsAdminUser]
    filter_backends = [OrderingFilter, SearchFilter]
    ordering_fields = ['timestamp', 'accion', 'semilla']
    search_fields = ['accion', 'objeto', 'digest']
