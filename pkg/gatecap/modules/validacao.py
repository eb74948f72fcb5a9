"""
Módulo Centralizado de Validação
=================================

Funções de validação reutilizáveis para flags da CLI e arquivos de porta
e de roteiro. Todas retornam tuplas (valido, mensagem_erro[, valor]) e
nunca lançam exceções.

Autor: GateCap Team
Versão: 1.0.0
"""

from typing import Any, List, Optional, Union

import numpy as np


# =============================================================================
# VALIDAÇÃO DE NÚMEROS
# =============================================================================

def validar_numero(
    valor: Any,
    nome_campo: str = "campo",
    tipo: type = int,
    min_valor: Optional[Union[int, float]] = None
) -> tuple[bool, Optional[str], Optional[Union[int, float]]]:
    """
    Valida um número.

    Args:
        valor: Valor a validar
        nome_campo: Nome do campo
        tipo: Tipo esperado (int ou float)
        min_valor: Valor mínimo

    Returns:
        Tuple (valido, mensagem_erro, valor_convertido)
    """
    try:
        if tipo == int:
            num = int(valor)
        elif tipo == float:
            num = float(valor)
        else:
            return False, f"Tipo {tipo} não suportado", None
    except (ValueError, TypeError):
        return False, f"{nome_campo} deve ser um número válido", None

    if tipo == float and not np.isfinite(num):
        return False, f"{nome_campo} deve ser finito", None

    if min_valor is not None and num < min_valor:
        return False, f"{nome_campo} deve ser pelo menos {min_valor}", None

    return True, None, num


def validar_lista_numeros(
    valor: Any,
    nome_campo: str = "lista",
    tipo: type = float,
    quantidade: Optional[int] = None,
    min_valor: Optional[Union[int, float]] = None
) -> tuple[bool, Optional[str], Optional[List[Union[int, float]]]]:
    """
    Valida uma lista de números separados por vírgula (ex.: "--alphas 0.1,0.2,0").

    Aceita também uma lista/tupla já separada.

    Returns:
        Tuple (valido, mensagem_erro, lista_convertida)
    """
    if valor is None:
        return False, f"{nome_campo} é obrigatório", None

    if isinstance(valor, str):
        partes = [p.strip() for p in valor.split(",") if p.strip() != ""]
    elif isinstance(valor, (list, tuple)):
        partes = list(valor)
    else:
        return False, f"{nome_campo} deve ser uma lista separada por vírgulas", None

    if quantidade is not None and len(partes) != quantidade:
        return False, f"{nome_campo} deve ter exatamente {quantidade} valor(es)", None

    numeros = []
    for i, parte in enumerate(partes):
        valido, erro, num = validar_numero(parte, f"{nome_campo}[{i}]", tipo, min_valor=min_valor)
        if not valido:
            return False, erro, None
        numeros.append(num)

    return True, None, numeros


# =============================================================================
# VALIDAÇÃO DE ESTRUTURAS
# =============================================================================

def validar_dict(
    valor: Any,
    nome_campo: str = "objeto",
    campos_obrigatorios: Optional[List[str]] = None
) -> tuple[bool, Optional[str]]:
    """
    Valida um dicionário.

    Args:
        valor: Valor a validar
        nome_campo: Nome do campo
        campos_obrigatorios: Lista de campos obrigatórios

    Returns:
        Tuple (valido, mensagem_erro)
    """
    if not isinstance(valor, dict):
        return False, f"{nome_campo} deve ser um objeto/dicionário"

    if campos_obrigatorios:
        for campo in campos_obrigatorios:
            if campo not in valor:
                return False, f"{nome_campo} deve conter o campo '{campo}'"

    return True, None


def validar_matriz_complexa(
    valor: Any,
    nome_campo: str = "matriz",
    dimensao: Optional[int] = None
) -> tuple[bool, Optional[str], Optional[np.ndarray]]:
    """
    Valida uma matriz quadrada complexa escrita como grade de pares [re, im].

    Args:
        valor: Lista de linhas; cada entrada é [re, im] ou um número real
        nome_campo: Nome do campo
        dimensao: Dimensão exigida (opcional)

    Returns:
        Tuple (valido, mensagem_erro, matriz)
    """
    if not isinstance(valor, list) or not valor:
        return False, f"{nome_campo} deve ser uma lista de linhas", None

    n = len(valor)
    if dimensao is not None and n != dimensao:
        return False, f"{nome_campo} deve ser {dimensao}x{dimensao}", None

    matriz = np.zeros((n, n), dtype=complex)
    for i, linha in enumerate(valor):
        if not isinstance(linha, list) or len(linha) != n:
            return False, f"{nome_campo}[{i}] deve ter {n} entradas", None
        for j, entrada in enumerate(linha):
            if isinstance(entrada, (list, tuple)):
                if len(entrada) != 2:
                    return False, f"{nome_campo}[{i}][{j}] deve ser um par [re, im]", None
                re_part, im_part = entrada
            else:
                re_part, im_part = entrada, 0.0
            ok_re, _, re_num = validar_numero(re_part, nome_campo, float)
            ok_im, _, im_num = validar_numero(im_part, nome_campo, float)
            if not (ok_re and ok_im):
                return False, f"{nome_campo}[{i}][{j}] contém valor não numérico", None
            matriz[i, j] = complex(re_num, im_num)

    return True, None, matriz


def validar_unitaria(
    matriz: np.ndarray,
    nome_campo: str = "matriz",
    atol: float = 1e-8
) -> tuple[bool, Optional[str]]:
    """
    Verifica se U†U = I dentro da tolerância.

    Returns:
        Tuple (valido, mensagem_erro)
    """
    matriz = np.asarray(matriz)
    if matriz.ndim != 2 or matriz.shape[0] != matriz.shape[1]:
        return False, f"{nome_campo} deve ser quadrada"
    residuo = np.linalg.norm(matriz.conj().T @ matriz - np.eye(matriz.shape[0]))
    if residuo > atol:
        return False, f"{nome_campo} não é unitária (resíduo {residuo:.3e})"
    return True, None


def validar_opcao(
    valor: Any,
    opcoes: List[str],
    nome_campo: str = "opção"
) -> tuple[bool, Optional[str]]:
    """Valida se o valor está entre as opções permitidas."""
    if valor not in opcoes:
        return False, f"{nome_campo} deve ser um de: {', '.join(opcoes)}"
    return True, None

