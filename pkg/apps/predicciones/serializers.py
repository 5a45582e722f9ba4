from django.conf import settings
from rest_framework import serializers

from .entrenamiento import TrainConfig
from .perdidas import ESTANDAR, PONDERADA, LossSpec


def pesos_por_defecto():
    """K1 y K2 de `settings.DOA` cuando el archivo de configuración no los trae."""
    return float(settings.DOA['K1']), float(settings.DOA['K2'])


class TrainConfigSerializer(serializers.Serializer):
    """Claves de entrenamiento de un archivo key=value."""
    lr = serializers.FloatField(min_value=0.0, required=False)
    batch = serializers.IntegerField(min_value=1, required=False)
    epochs = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    loss = serializers.ChoiceField(choices=[ESTANDAR, PONDERADA], required=False)
    k1 = serializers.FloatField(required=False)
    k2 = serializers.FloatField(required=False)
    validation_fraction = serializers.FloatField(min_value=0.0, max_value=0.99, required=False)

    def validate(self, attrs):
        k1, k2 = pesos_por_defecto()
        attrs.setdefault('k1', k1)
        attrs.setdefault('k2', k2)
        if not attrs['k2'] > attrs['k1'] > 1.0:
            raise serializers.ValidationError({'k2': "Se requiere K2 > K1 > 1."})
        return attrs

    def create(self, validated_data):
        datos = dict(validated_data)
        config_perdida = LossSpec(
            kind=datos.pop('loss', PONDERADA),
            k1=datos.pop('k1'),
            k2=datos.pop('k2'),
        )
        return TrainConfig(loss_spec=config_perdida, **datos)
