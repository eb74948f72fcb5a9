"""
Módulo de Relatórios
====================

Relatório único de todos os comandos da CLI e sua renderização em texto,
JSON e CSV (via pandas).

Números são arredondados para 12 algarismos significativos; o tempo de
execução fica fora da garantia de determinismo e só é emitido no texto e
no JSON.

Autor: GateCap Team
Versão: 1.0.0
"""

import io
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    results: Dict[str, Any]
    seed: Optional[int] = None
    wall_time: float = 0.0
    table: Optional[List[Dict[str, Any]]] = field(default=None, repr=False)

    def to_dict(self, include_time: bool = True) -> Dict[str, Any]:
        payload = {
            "command": self.command,
            "seed": self.seed,
            "config": arredondar(self.config),
            "results": arredondar(self.results),
        }
        if include_time:
            payload["wall_time"] = round(self.wall_time, 3)
        return payload


def arredondar(valor: Any) -> Any:
    """Converte recursivamente para tipos JSON, com 12 algarismos significativos."""
    if isinstance(valor, dict):
        return {str(k): arredondar(v) for k, v in valor.items()}
    if isinstance(valor, (list, tuple)):
        return [arredondar(v) for v in valor]
    if isinstance(valor, np.ndarray):
        return arredondar(valor.tolist())
    if isinstance(valor, (bool, np.bool_)):
        return bool(valor)
    if isinstance(valor, (int, np.integer)):
        return int(valor)
    if isinstance(valor, (complex, np.complexfloating)):
        return [arredondar(float(valor.real)), arredondar(float(valor.imag))]
    if isinstance(valor, (float, np.floating)):
        valor = float(valor)
        if not np.isfinite(valor):
            return str(valor)
        arredondado = float(f"{valor:.{SIGNIFICANT_DIGITS}g}")
        return 0.0 if arredondado == 0 else arredondado
    return valor


def to_json(report: Report) -> str:
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False)


def _linhas(valor: Any, prefixo: str = "") -> List[str]:
    if isinstance(valor, dict):
        linhas = []
        for chave, item in valor.items():
            nome = f"{prefixo}.{chave}" if prefixo else str(chave)
            linhas.extend(_linhas(item, nome))
        return linhas
    return [f"{prefixo}: {valor}"]


def to_text(report: Report) -> str:
    cabecalho = [f"gatecap {report.command}", f"seed: {report.seed}"]
    corpo = _linhas(arredondar(report.results))
    rodape = [f"tempo: {report.wall_time:.3f} s"]
    return "\n".join(cabecalho + corpo + rodape)


def to_csv(report: Report) -> str:
    """
    Tabela do relatório (uma linha por item) ou, sem tabela, os resultados
    achatados numa única linha.
    """
    if report.table:
        df = pd.DataFrame(arredondar(report.table))
    else:
        df = pd.json_normalize(arredondar(report.results))
    output = io.StringIO()
    df.to_csv(output, index=False)
    return output.getvalue()


def render(report: Report, formato: str = "text") -> str:
    if formato == "json":
        return to_json(report)
    if formato == "csv":
        return to_csv(report)
    return to_text(report)
