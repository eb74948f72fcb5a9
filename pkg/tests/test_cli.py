"""
Testes da linha de comando: códigos de saída e relatórios.
"""

import json
import os

import numpy as np
import pytest

from gatecap.cli import build_parser, main
from gatecap.modules.error_handler import EXIT_INPUT, EXIT_OK

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def _json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture(autouse=True)
def _ambiente_limpo(monkeypatch):
    for variavel in list(os.environ):
        if variavel.startswith("GATECAP_"):
            monkeypatch.delenv(variavel, raising=False)


def test_decompose_json(capsys):
    assert main(["decompose", "--gate", "cnot", "--json"]) == EXIT_OK
    relatorio = _json(capsys)
    assert relatorio["command"] == "decompose"
    assert np.allclose(relatorio["results"]["alphas"], [np.pi / 4, 0, 0], atol=1e-8)
    assert relatorio["results"]["checks"]["residual"]["pass"] is True


def test_decompose_por_alphas(capsys):
    assert main(["decompose", "--alphas", "0.3,0.2,0.1", "--json"]) == EXIT_OK
    assert np.allclose(_json(capsys)["results"]["alphas"], [0.3, 0.2, 0.1], atol=1e-8)


def test_decompose_deterministico(capsys):
    main(["decompose", "--gate", os.path.join(FIXTURES, "swap_matrix.json"), "--json"])
    primeiro = _json(capsys)
    main(["decompose", "--gate", os.path.join(FIXTURES, "swap_matrix.json"), "--json"])
    segundo = _json(capsys)
    primeiro.pop("wall_time")
    segundo.pop("wall_time")
    assert primeiro == segundo


def test_erros_de_entrada(capsys):
    assert main(["decompose"]) == EXIT_INPUT
    assert main(["decompose", "--gate", os.path.join(FIXTURES, "malformado.json")]) == EXIT_INPUT
    assert main(["decompose", "--gate", os.path.join(FIXTURES, "nao_unitaria.json")]) == EXIT_INPUT
    assert main(["decompose", "--alphas", "1,2"]) == EXIT_INPUT
    capsys.readouterr()

    assert main(["bounds", "--n", "2", "--json"]) == EXIT_INPUT
    diagnostico = _json(capsys)
    assert diagnostico["exit_code"] == EXIT_INPUT
    assert "--rates" in diagnostico["error"]


def test_bounds(capsys):
    argv = ["bounds", "--rates", "2,2,1,1", "--n", "2", "--d", "4", "--tau", "1", "--json"]
    assert main(argv) == EXIT_OK
    results = _json(capsys)["results"]
    assert results["K"] == 6.0
    assert results["epsilon_threshold"] == pytest.approx(1 / 65536)


def test_capacity_identidade(capsys):
    argv = ["capacity", "--gate", "identity", "--restarts", "2", "--max-iterations", "20", "--json"]
    assert main(argv) == EXIT_OK
    results = _json(capsys)["results"]
    assert abs(results["E_U"]) < 1e-9 and abs(results["E_U_minus"]) < 1e-9
    assert results["lower_bound"] is True


def test_capacity_csv(capsys):
    argv = ["capacity", "--gate", "identity", "--restarts", "3", "--max-iterations", "5", "--csv"]
    assert main(argv) == EXIT_OK
    linhas = capsys.readouterr().out.strip().splitlines()
    assert linhas[0] == "restart,E_U,E_U_minus"
    assert len(linhas) == 4


def test_ensemble_contraexemplo(capsys):
    assert main(["ensemble", "counterexample", "--json"]) == EXIT_OK
    results = _json(capsys)["results"]
    assert results["total"] == pytest.approx(1.0, abs=1e-12)


def test_ensemble_appendix_b(capsys):
    assert main(["ensemble", "appendix-b", "--seed", "3", "--json"]) == EXIT_OK
    assert _json(capsys)["results"]["marginal_mismatch"] < 1e-12


def test_protocol_fidelity(capsys):
    assert main(["protocol", "fidelity", "--script", "cnot-forward", "--json"]) == EXIT_OK
    results = _json(capsys)["results"]
    assert results["eps"] < 1e-12
    assert results["chi_bob"] == pytest.approx(1.0, abs=1e-9)


def test_protocol_superpose_e_rates(capsys):
    assert main(["protocol", "superpose", "--script", "cnot-assisted", "--json"]) == EXIT_OK
    assert _json(capsys)["results"]["E_eta_direct"] == pytest.approx(2.0, abs=1e-9)

    assert main(["protocol", "rates", "--script", "swap-exchange", "--json"]) == EXIT_OK
    results = _json(capsys)["results"]
    assert results["rate_pair"] == [1.0, 1.0]
    assert results["rate_set"] == "S_U"


def test_protocol_reverse(capsys):
    assert main(["protocol", "reverse", "--script", "cnot-assisted", "--json"]) == EXIT_OK
    results = _json(capsys)["results"]
    assert results["gate_applications"] == 2
    assert results["min_round_fidelity"] >= 1 - 1e-9


def test_protocol_sem_roteiro():
    assert main(["protocol", "run"]) == EXIT_INPUT


def test_parser_formatos_exclusivos():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["decompose", "--gate", "cnot", "--json", "--csv"])


def test_verify_chain_identidade(capsys):
    argv = ["verify-chain", "--gate", "identity", "--restarts", "2", "--max-iterations", "10", "--json"]
    assert main(argv) == EXIT_OK
    results = _json(capsys)["results"]
    assert abs(results["delta_chi_forward"]) < 1e-9
    assert all(check["pass"] for check in results["checks"].values())


@pytest.mark.parametrize("modo", ["uni", "bidir"])
def test_ensemble_compara_com_capacidade_independente(capsys, modo):
    argv = ["ensemble", modo, "--gate", "identity", "--restarts", "2", "--max-iterations", "10", "--json"]
    assert main(argv) == EXIT_OK
    results = _json(capsys)["results"]
    assert abs(results["E_U"]) < 1e-9
    assert ("delta_chi_eq_E_U" if modo == "uni" else "delta_chi_eq_2E_U") in results["checks"]
    assert all(check["pass"] for check in results["checks"].values())


@pytest.mark.slow
def test_ensemble_uni_cnot(capsys):
    assert main(["ensemble", "uni", "--gate", "cnot", "--json"]) == EXIT_OK
    results = _json(capsys)["results"]
    assert abs(results["E_U"] - 1.0) < 1e-3
    assert abs(results["delta_chi_forward"] - results["E_U"]) < 2e-3
