from rest_framework import serializers

from .models import Bitacora


class BitacoraSerializer(serializers.ModelSerializer):
    class Meta:
        model = Bitacora
        fields = ['id', 'accion', 'objeto', 'semilla', 'digest', 'extra', 'timestamp']
        read_only_fields = fields
