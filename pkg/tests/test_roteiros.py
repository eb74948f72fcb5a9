"""
Testes do formato JSON de portas e roteiros.
"""

import json
import os

import numpy as np
import pytest

from gatecap.modules.canonical import swap
from gatecap.modules.error_handler import NonUnitaryError, ScriptFormatError, ValidationError
from gatecap.modules.protocol import message_fidelity
from gatecap.modules.roteiros import (
    SHIPPED_SCRIPTS, cnot_assisted, gate_from_dict, gate_from_source, save_script,
    script_from_dict, script_from_source, script_to_dict, swap_matrix,
)

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def _fixture(nome):
    return os.path.join(FIXTURES, nome)


def test_porta_por_nome_e_por_arquivo():
    assert gate_from_source("cnot").name == "cnot"
    assert gate_from_source(_fixture("cnot.json")).name == "cnot"


def test_porta_por_alphas():
    gate = gate_from_source(_fixture("b_gate_alphas.json"))
    assert np.allclose(gate.matrix.T, gate.matrix), "U_d é simétrica"


def test_porta_por_matriz():
    gate = gate_from_source(_fixture("swap_matrix.json"))
    assert gate.name == "swap-arquivo"
    assert np.allclose(gate.matrix, swap().matrix)


def test_porta_invalida():
    with pytest.raises(ScriptFormatError):
        gate_from_source(_fixture("malformado.json"))
    with pytest.raises(NonUnitaryError):
        gate_from_source(_fixture("nao_unitaria.json"))
    with pytest.raises(ScriptFormatError):
        gate_from_source(_fixture("porta_desconhecida.json"))
    with pytest.raises(ValidationError):
        gate_from_source("nao-existe")


def test_gate_from_dict_precedencia():
    dados = {"name": "cnot", "alphas": [0.1, 0.0, 0.0]}
    assert gate_from_dict(dados).name.startswith("U_d"), "alphas tem precedência sobre name"
    with pytest.raises(ScriptFormatError):
        gate_from_dict({"alphas": [0.1, 0.0]})


def test_roteiro_ida_e_volta_em_dict():
    original = cnot_assisted()
    copia = script_from_dict(script_to_dict(original))
    assert copia.layout == original.layout
    assert copia.t == original.t and (copia.n_a, copia.n_b) == (1, 1)
    assert message_fidelity(copia).eps < 1e-12


def test_salvar_e_carregar_roteiro(tmp_path):
    caminho = str(tmp_path / "roteiro.json")
    save_script(cnot_assisted(), caminho)
    with open(caminho, encoding="utf-8") as f:
        dados = json.load(f)
    assert dados["input_registers"] == ["A1", "B1"]
    assert message_fidelity(script_from_source(caminho)).eps < 1e-12


def test_roteiro_incompleto(tmp_path):
    dados = script_to_dict(cnot_assisted())
    del dados["steps"]
    with pytest.raises(ScriptFormatError):
        script_from_dict(dados)

    caminho = tmp_path / "quebrado.json"
    caminho.write_text("{ nao é json", encoding="utf-8")
    with pytest.raises(ScriptFormatError):
        script_from_source(str(caminho))


def test_roteiros_distribuidos_registrados():
    for nome, fabrica in SHIPPED_SCRIPTS.items():
        assert script_from_source(nome).name == fabrica().name
    with pytest.raises(ValidationError):
        script_from_source("inexistente")


def test_swap_matrix():
    m = swap_matrix(3)
    assert m[2 * 3 + 1, 1 * 3 + 2] == 1.0, "|1⟩|2⟩ → |2⟩|1⟩"
    assert np.allclose(m @ m, np.eye(9))


@pytest.mark.parametrize("nome", sorted(SHIPPED_SCRIPTS))
def test_ler_escrever_ler_exato(nome):
    dados = json.loads(json.dumps(script_to_dict(SHIPPED_SCRIPTS[nome]())))
    relido = json.loads(json.dumps(script_to_dict(script_from_dict(dados))))
    assert relido == dados, f"{nome}: serialização não é estável"
    assert json.loads(json.dumps(script_to_dict(script_from_dict(relido)))) == relido
