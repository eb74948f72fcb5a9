"""
Testes da busca de capacidade de emaranhamento (E_U e E_U⁻).

As buscas usam poucos reinícios; os valores são limites inferiores e não
podem ultrapassar as capacidades conhecidas.
"""

import numpy as np
import pytest

from gatecap.modules.canonical import Gate, cnot, identity, make_ud, random_gate, random_local, swap
from gatecap.modules.capacity import (
    DISENTANGLING, ENTANGLING, CapacitySearchConfig, capability_layout, conjugate_witness,
    disentangling_capability, entangling_capability, entanglement_change, gradient_check,
    product_state_capability,
)
from gatecap.modules.error_handler import NonUnitaryError, ValidationError
from gatecap.modules.qmath import random_state

RAPIDA = CapacitySearchConfig(restarts=6, max_iterations=400, seed=0)
CURTA = CapacitySearchConfig(restarts=4, max_iterations=40, seed=3)
PADRAO = CapacitySearchConfig(workers=4)


def test_identidade_tem_capacidade_zero():
    report = entangling_capability(identity(), CURTA)
    assert abs(report.value) < 1e-9, f"E_identidade = {report.value}"
    assert all(abs(v) < 1e-9 for v in report.per_restart_values)
    assert report.converged, "Gradiente nulo deve convergir na primeira iteração"


def test_cnot_limitado_a_um_ebit():
    ent = entangling_capability(cnot(), RAPIDA)
    assert 0.98 <= ent.value <= 1.0 + 1e-9, f"E_CNOT = {ent.value}"
    dis = disentangling_capability(cnot(), RAPIDA)
    assert 0.98 <= dis.value <= 1.0 + 1e-9, f"E⁻_CNOT = {dis.value}"
    assert dis.direction == DISENTANGLING


@pytest.mark.slow
@pytest.mark.parametrize("fabrica, esperado", [(cnot, 1.0), (swap, 2.0)])
def test_capacidade_conhecida_na_configuracao_padrao(fabrica, esperado):
    ent = entangling_capability(fabrica(), PADRAO)
    dis = disentangling_capability(fabrica(), PADRAO)
    assert abs(ent.value - esperado) <= 1e-3, f"E = {ent.value}, esperado {esperado}"
    assert abs(dis.value - esperado) <= 1e-3, f"E⁻ = {dis.value}, esperado {esperado}"


def test_valor_reproduzivel_pelo_melhor_estado():
    ud = make_ud(0.3, 0.2, 0.1)
    report = entangling_capability(ud, CURTA)
    recomputado = entanglement_change(ud, report.best_state)
    assert abs(recomputado - report.value) < 1e-12
    assert abs(report.final_entanglement - report.initial_entanglement - report.value) < 1e-12
    assert abs(report.value - max(report.per_restart_values)) <= 1e-12


def test_busca_deterministica():
    a = entangling_capability(make_ud(0.5, 0.2, 0.0), CURTA)
    b = entangling_capability(make_ud(0.5, 0.2, 0.0), CURTA)
    assert a.per_restart_values == b.per_restart_values
    assert np.array_equal(a.best_state.amplitudes, b.best_state.amplitudes)


def test_threads_nao_alteram_resultado():
    serial = entangling_capability(make_ud(0.5, 0.2, 0.0), CURTA)
    paralelo = entangling_capability(
        make_ud(0.5, 0.2, 0.0),
        CapacitySearchConfig(restarts=4, max_iterations=40, seed=3, workers=3),
    )
    assert serial.per_restart_values == paralelo.per_restart_values
    assert serial.value == paralelo.value


def test_ancilas_maiores():
    cfg = CapacitySearchConfig(ancilla_dim_A=3, ancilla_dim_B=1, restarts=2, max_iterations=30)
    report = entangling_capability(cnot(), cfg)
    assert report.best_state.layout.dims == (3, 2, 2, 1)


def test_gradiente_analitico_confere_com_diferencas_finitas():
    rng = np.random.default_rng(17)
    psi = random_state(capability_layout(2, 2), rng)
    for direction in (ENTANGLING, DISENTANGLING):
        erro = gradient_check(random_gate(4), psi, direction)
        assert erro < 1e-5, f"Desvio do gradiente {erro:.2e}"


def test_testemunha_conjugada_inverte_variacao():
    rng = np.random.default_rng(21)
    ud = make_ud(0.6, 0.3, 0.1)
    psi = random_state(capability_layout(2, 2), rng)
    witness = conjugate_witness(ud, psi)
    assert abs(entanglement_change(ud, witness) + entanglement_change(ud, psi)) < 1e-9


def test_testemunha_exige_forma_canonica():
    psi = random_state(capability_layout(2, 2), np.random.default_rng(0))
    with pytest.raises(ValidationError):
        conjugate_witness(random_gate(5), psi)


def test_entradas_produto_cnot():
    report = product_state_capability(cnot(), CapacitySearchConfig(restarts=4, max_iterations=300))
    assert 0.99 <= report.value <= 1.0 + 1e-9, f"Entradas produto: {report.value}"
    assert report.best_state.layout.dims == (1, 2, 2, 1)


def test_config_a_partir_do_ambiente():
    cfg = CapacitySearchConfig.from_config(
        {"seed": 5, "restarts": 3, "ancilla_dims": (3, 2)},
        restarts=None,
        max_iterations=10,
    )
    assert (cfg.seed, cfg.restarts, cfg.max_iterations) == (5, 3, 10)
    assert (cfg.ancilla_dim_A, cfg.ancilla_dim_B) == (3, 2)

    cfg = CapacitySearchConfig.from_config({}, ancilla_dims=[1, 4])
    assert (cfg.ancilla_dim_A, cfg.ancilla_dim_B) == (1, 4)


def test_config_invalida():
    with pytest.raises(ValidationError):
        CapacitySearchConfig(restarts=0)
    with pytest.raises(ValidationError):
        CapacitySearchConfig(ancilla_dim_A=0)


def test_porta_nao_unitaria():
    with pytest.raises(NonUnitaryError):
        entangling_capability(np.ones((4, 4)), CURTA)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_emaranhar_e_desemaranhar_coincidem(seed):
    gate = random_gate(seed)
    ent = entangling_capability(gate, PADRAO)
    dis = disentangling_capability(gate, PADRAO)
    assert abs(ent.value - dis.value) <= 2e-3, f"seed {seed}: E={ent.value}, E⁻={dis.value}"


@pytest.mark.slow
def test_capacidade_invariante_por_unitarias_locais():
    rng = np.random.default_rng(33)
    base = random_gate(40)
    a, b = random_local(rng)
    c, d = random_local(rng)
    vestida = Gate(np.kron(a, b) @ base.matrix @ np.kron(c, d), "vestida")
    original = entangling_capability(base, PADRAO).value
    local = entangling_capability(vestida, PADRAO).value
    assert abs(original - local) <= 2e-3, f"{original} ≠ {local}"
