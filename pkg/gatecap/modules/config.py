"""
Módulo de Configuração
======================

Valores padrão da CLI e da busca de capacidade, lidos de variáveis de
ambiente (opcionalmente de um arquivo .env). Flags da linha de comando
sempre têm precedência sobre o ambiente.

Variáveis reconhecidas:
    GATECAP_SEED, GATECAP_RESTARTS, GATECAP_MAX_ITERATIONS,
    GATECAP_GRADIENT_TOL, GATECAP_ANCILLA_DIMS, GATECAP_WORKERS,
    GATECAP_LOG_LEVEL, GATECAP_TOL

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
import os
from typing import Any, Dict, Optional

from gatecap.modules.validacao import validar_lista_numeros, validar_numero, validar_opcao

logger = logging.getLogger(__name__)

# Carrega variáveis de ambiente (opcional)
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # dotenv não instalado - usa variáveis de ambiente do sistema
    pass


DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "restarts": 32,
    "max_iterations": 400,
    "gradient_tolerance": 1e-9,
    "ancilla_dims": (2, 2),
    "workers": min(8, os.cpu_count() or 1),
    "log_level": "WARNING",
    "tol": 4e-3,
}

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# nome da chave -> (variável, tipo, mínimo)
_ENV_VARS = {
    "seed": ("GATECAP_SEED", int, 0),
    "restarts": ("GATECAP_RESTARTS", int, 1),
    "max_iterations": ("GATECAP_MAX_ITERATIONS", int, 1),
    "gradient_tolerance": ("GATECAP_GRADIENT_TOL", float, 0.0),
    "workers": ("GATECAP_WORKERS", int, 1),
    "tol": ("GATECAP_TOL", float, 0.0),
}


def load_config(environ: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """
    Monta a configuração a partir do ambiente, com fallback para os padrões.

    Valores inválidos geram aviso no log e são substituídos pelo padrão.

    Args:
        environ: Mapeamento alternativo a os.environ (usado nos testes)

    Returns:
        Dict com todas as chaves de DEFAULT_CONFIG
    """
    env = os.environ if environ is None else environ
    config = dict(DEFAULT_CONFIG)

    for chave, (variavel, tipo, minimo) in _ENV_VARS.items():
        bruto = env.get(variavel)
        if bruto is None or bruto.strip() == "":
            continue
        valido, erro, valor = validar_numero(bruto, variavel, tipo, min_valor=minimo)
        if valido:
            config[chave] = valor
        else:
            logger.warning(f"⚠️ {erro}; usando padrão {DEFAULT_CONFIG[chave]}")

    bruto = env.get("GATECAP_ANCILLA_DIMS")
    if bruto:
        valido, erro, dims = validar_lista_numeros(bruto, "GATECAP_ANCILLA_DIMS", int, quantidade=2, min_valor=1)
        if valido:
            config["ancilla_dims"] = tuple(dims)
        else:
            logger.warning(f"⚠️ {erro}; usando padrão {DEFAULT_CONFIG['ancilla_dims']}")

    nivel = env.get("GATECAP_LOG_LEVEL")
    if nivel:
        valido, erro = validar_opcao(nivel.upper(), LOG_LEVELS, "GATECAP_LOG_LEVEL")
        if valido:
            config["log_level"] = nivel.upper()
        else:
            logger.warning(f"⚠️ {erro}")

    return config
