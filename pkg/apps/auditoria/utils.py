import logging

from .models import Bitacora

logger = logging.getLogger(__name__)


def log_action(accion, objeto=None, semilla=None, digest=None, extra=None):
    """
    Registra una ejecución en la bitácora. Nunca lanza: si la escritura
    falla se deja constancia en el log y se devuelve None.
    """
    try:
        return Bitacora.objects.create(
            accion=accion,
            objeto=str(objeto) if objeto is not None else None,
            semilla=semilla,
            digest=digest,
            extra=extra,
        )
    except Exception:
        logger.exception("Error al registrar '%s' en la bitácora", accion)
        return None
