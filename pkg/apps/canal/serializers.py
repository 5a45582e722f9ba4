from rest_framework import serializers

from .escenarios import ScenarioConfig
from .etiquetas import TABLA_ETIQUETAS


class RangoField(serializers.Field):
    """Rango cerrado escrito como 'a,b' (o lista de dos valores)."""

    default_error_messages = {
        'invalid': "Se esperaba un rango 'a,b'.",
        'empty': "El rango está vacío: el mínimo supera al máximo.",
    }

    def __init__(self, *, entero=False, **kwargs):
        self.entero = entero
        super().__init__(**kwargs)

    def to_internal_value(self, data):
        if isinstance(data, str):
            partes = data.split(',')
        elif isinstance(data, (list, tuple)):
            partes = list(data)
        else:
            self.fail('invalid')
        if len(partes) != 2:
            self.fail('invalid')
        convertir = int if self.entero else float
        try:
            lo, hi = (convertir(str(p).strip()) for p in partes)
        except (TypeError, ValueError):
            self.fail('invalid')
        if lo > hi:
            self.fail('empty')
        return (lo, hi)

    def to_representation(self, value):
        return f"{value[0]},{value[1]}"


class ClasesField(serializers.Field):
    """Subconjunto de clases 1..18: '1-6', '1,2,5' o lista."""

    default_error_messages = {
        'invalid': "Formato de clases inválido; use '1-6' o '1,2,5'.",
        'range': "Las clases deben estar en 1..18.",
    }

    def to_internal_value(self, data):
        try:
            if isinstance(data, str) and '-' in data:
                lo, hi = (int(p) for p in data.split('-'))
                clases = list(range(lo, hi + 1))
            elif isinstance(data, str):
                clases = [int(p) for p in data.split(',') if p.strip()]
            else:
                clases = [int(p) for p in data]
        except (TypeError, ValueError):
            self.fail('invalid')
        if not clases or any(c not in TABLA_ETIQUETAS for c in clases):
            self.fail('range')
        return tuple(sorted(set(clases)))

    def to_representation(self, value):
        return ','.join(str(c) for c in value)


class ScenarioConfigSerializer(serializers.Serializer):
    """Valida las claves de simulación de un archivo key=value."""
    snr_range = RangoField(required=False)
    samples_per_block = serializers.IntegerField(min_value=1, required=False)
    multipath_power_range = RangoField(required=False)
    delay_range = RangoField(entero=True, required=False)
    cone_half_angle = serializers.FloatField(min_value=0.001, max_value=90.0, required=False)
    carrier = serializers.FloatField(min_value=1.0, required=False)
    max_velocity = serializers.FloatField(min_value=0.001, required=False)
    samples_per_symbol = serializers.IntegerField(min_value=1, required=False)
    overloaded_fraction = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    classes = ClasesField(required=False)

    def validate_delay_range(self, value):
        if value[0] < 0:
            raise serializers.ValidationError("Los retardos no pueden ser negativos.")
        return value

    def create(self, validated_data):
        return ScenarioConfig(**validated_data)
