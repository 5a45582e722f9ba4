"""
Jerarquía de errores del dominio.

Todas las operaciones de las apps lanzan subclases de ErrorDominio; los
comandos de gestión las convierten en una línea {"error": ...} y salida != 0.
"""


class ErrorDominio(Exception):
    """Raíz de los errores de simulación, estimación y entrenamiento."""


class GeometriaInvalidaError(ErrorDominio, ValueError):
    pass


class EntradaVaciaError(ErrorDominio, ValueError):
    pass


class FueraDeRangoError(ErrorDominio, ValueError):
    pass


class EtiquetaInvalidaError(ErrorDominio, ValueError):
    """La tupla (n_S, n_M, n_P) no pertenece al espacio de etiquetas."""


class EntradaInvalidaError(ErrorDominio, ValueError):
    """Muestras no finitas o matriz no hermítica."""


class EntradaDegeneradaError(ErrorDominio, ValueError):
    pass


class OrdenExcesivoError(ErrorDominio, ValueError):
    """El orden del modelo no deja subespacio de ruido (n_M >= E)."""


class FormaInvalidaError(ErrorDominio, ValueError):
    pass


class EtiquetaInconsistenteError(ErrorDominio, ValueError):
    pass


class BloquesInsuficientesError(ErrorDominio, ValueError):
    """Faltan bloques para el suavizado temporal; `requeridos` indica cuántos."""

    def __init__(self, requeridos, disponibles):
        self.requeridos = requeridos
        self.disponibles = disponibles
        super().__init__(
            f"Se requieren {requeridos} bloques y solo hay {disponibles}."
        )


class EntrenamientoFallidoError(ErrorDominio, RuntimeError):
    def __init__(self, epoca, mensaje="La pérdida divergió (NaN)."):
        self.epoca = epoca
        super().__init__(f"{mensaje} Época {epoca}.")


class ArchivoError(ErrorDominio, OSError):
    pass


class EstadoInvalidoError(ErrorDominio, RuntimeError):
    """Operación fuera de orden, p. ej. backward sin un forward previo."""
