"""
Módulo de Tratamento de Erros
==============================

Hierarquia de exceções da biblioteca e decorator que converte exceções em
códigos de saída da CLI.

Códigos de saída:
    0 - sucesso (todas as verificações passaram)
    1 - falha de verificação / erro inesperado
    2 - erro de entrada (arquivo, flag, matriz não unitária)
    3 - otimização não convergiu

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from functools import wraps
from typing import Any, Callable, Dict, Optional

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_INPUT = 2
EXIT_NONCONVERGENCE = 3


class GateCapacityError(Exception):
    """Exceção base para erros do sistema"""
    def __init__(self, message: str, exit_code: int = EXIT_ASSERTION, details: dict = None):
        self.message = message
        self.exit_code = exit_code
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(GateCapacityError):
    """Erro de validação de entrada"""
    def __init__(self, message: str, field: str = None, details: dict = None):
        super().__init__(message, exit_code=EXIT_INPUT, details=details)
        self.field = field


class NonUnitaryError(GateCapacityError):
    """Matriz fornecida não é unitária"""
    def __init__(self, message: str = "Matriz não unitária", details: dict = None):
        super().__init__(message, exit_code=EXIT_INPUT, details=details)


class LayoutError(GateCapacityError):
    """Layout de subsistemas inconsistente com o estado ou operador"""
    def __init__(self, message: str, details: dict = None):
        super().__init__(message, exit_code=EXIT_INPUT, details=details)


class ScriptFormatError(GateCapacityError):
    """Arquivo de roteiro ou de porta malformado"""
    def __init__(self, message: str, details: dict = None):
        super().__init__(message, exit_code=EXIT_INPUT, details=details)


class DecompositionError(GateCapacityError):
    """Decomposição canônica não atingiu a precisão exigida"""
    def __init__(self, message: str, details: dict = None):
        super().__init__(message, exit_code=EXIT_ASSERTION, details=details)


class BoundsGapError(GateCapacityError):
    """Limites inferior e superior de Holevo não coincidem"""
    def __init__(self, message: str, details: dict = None):
        super().__init__(message, exit_code=EXIT_ASSERTION, details=details)


def format_error_response(error: Exception, include_details: bool = False) -> Dict[str, Any]:
    """
    Formata uma resposta de erro padronizada.

    Args:
        error: Exceção ocorrida
        include_details: Se deve incluir detalhes técnicos

    Returns:
        Dict com resposta formatada
    """
    response = {
        "error": str(error),
        "exit_code": EXIT_ASSERTION
    }

    if isinstance(error, GateCapacityError):
        response.update({
            "error": error.message,
            "exit_code": error.exit_code,
            "type": error.__class__.__name__
        })
        if include_details and error.details:
            response["details"] = error.details
        field = getattr(error, "field", None)
        if field:
            response["field"] = field
    elif isinstance(error, (ValueError, KeyError)):
        response["exit_code"] = EXIT_INPUT

    return response


def handle_errors(f: Callable[..., int]) -> Callable[..., int]:
    """
    Decorator para tratamento automático de erros dos comandos da CLI.

    O comando decorado retorna o código de saída; exceções são registradas
    no log e convertidas no código correspondente. O diagnóstico é entregue
    ao callback `on_error`, quando informado via kwargs.

    Usage:
        @handle_errors
        def cmd_decompose(args, on_error=None) -> int:
            ...
            return EXIT_OK
    """
    @wraps(f)
    def wrapper(*args, **kwargs):
        on_error: Optional[Callable[[Dict[str, Any]], None]] = kwargs.get("on_error")
        try:
            return f(*args, **kwargs)
        except GateCapacityError as e:
            # Erro conhecido do sistema
            logger.warning(f"⚠️ {e.__class__.__name__}: {e.message}")
            response = format_error_response(e, include_details=True)
        except ValueError as e:
            logger.warning(f"⚠️ Erro de validação: {e}")
            response = format_error_response(e)
        except KeyError as e:
            logger.warning(f"⚠️ Campo obrigatório ausente: {e}")
            response = format_error_response(e)
            response["error"] = f"Campo obrigatório ausente: {e}"
        except Exception as e:
            logger.error(
                f"❌ Erro inesperado em {f.__name__}: {e}",
                exc_info=True
            )
            response = {"error": f"Erro interno: {e}", "exit_code": EXIT_ASSERTION}

        if on_error is not None:
            on_error(response)
        return response["exit_code"]

    return wrapper
