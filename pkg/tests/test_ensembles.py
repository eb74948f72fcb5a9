"""
Testes de informação de Holevo e dos ensembles de codificação.
"""

import numpy as np
import pytest

from gatecap.modules.canonical import cnot, identity, is_canonical_form, make_ud, random_gate, swap
from gatecap.modules.capacity import (
    CapacitySearchConfig, capability_layout, entangling_capability, entanglement_change,
)
from gatecap.modules.ensembles import (
    BACKWARD, FORWARD, CorrectionMaps, Ensemble, appendix_b_ensemble, bidir_chain,
    build_bidirectional_ensemble, build_unidirectional_ensemble, chi_interval, chi_up,
    counterexample_ensemble, delta_chi_bidir, delta_chi_oneway, depolarization_residual,
    holevo_chi, identity_correction_maps, marginal_mismatch, oneway_chain,
    pauli_correction_maps, product_marginal_ensembles, receiver_chi,
)
from gatecap.modules.error_handler import BoundsGapError, ValidationError
from gatecap.modules.qmath import (
    BOB, MESSAGE, DensityOperator, PartitionedState, basis_state, make_layout, random_state,
)

CADEIA = CapacitySearchConfig(restarts=3, max_iterations=60, seed=1)
PADRAO = CapacitySearchConfig(workers=4)


def _qubit():
    return make_layout([("q", 2, BOB, MESSAGE)])


def _estado(seed, dims=(2, 2)):
    return random_state(capability_layout(*dims), np.random.default_rng(seed))


def test_holevo_exemplos():
    layout = _qubit()
    zero, um = basis_state(layout, [0]), basis_state(layout, [1])
    mais = PartitionedState(np.array([1, 1]) / np.sqrt(2), layout)
    assert abs(holevo_chi(Ensemble([0.5, 0.5], [zero, um])) - 1.0) < 1e-12
    assert round(holevo_chi(Ensemble([0.5, 0.5], [zero, mais])), 4) == 0.6009


def test_holevo_membros_mistos():
    layout = _qubit()
    misto = DensityOperator(np.eye(2) / 2, layout)
    assert holevo_chi(Ensemble([0.3, 0.7], [misto, misto])) < 1e-12


def test_probabilidades_invalidas():
    layout = _qubit()
    zero = basis_state(layout, [0])
    with pytest.raises(ValidationError):
        Ensemble([0.5, 0.6], [zero, zero])
    with pytest.raises(ValidationError):
        Ensemble([1.0], [zero, zero])


def test_despolarizacao_do_gate_qubit_de_bob():
    for seed, dims in [(0, (2, 2)), (1, (3, 2)), (2, (2, 1))]:
        residuo = depolarization_residual(_estado(seed, dims))
        assert residuo < 1e-12, f"dims {dims}: resíduo {residuo:.2e}"


def test_delta_chi_unidirecional_igual_a_queda_de_emaranhamento():
    ud = make_ud(0.5, 0.25, 0.1)
    for seed in range(5):
        psi = _estado(seed)
        delta = delta_chi_oneway(ud, build_unidirectional_ensemble(psi))
        assert abs(delta + entanglement_change(ud, psi)) < 1e-9, f"seed {seed}: Δχ→ = {delta}"


def test_receiver_chi_direcao_invalida():
    ens = build_unidirectional_ensemble(_estado(3))
    with pytest.raises(ValidationError):
        receiver_chi(ens, "<->")


def test_contraexemplo():
    e = counterexample_ensemble()
    assert abs(chi_up(e, FORWARD) - 0.5) < 1e-12
    assert abs(chi_up(e, BACKWARD) - 0.5) < 1e-12

    maps = identity_correction_maps(e.layout, 2, 2)
    lo, up = chi_interval(e, maps, FORWARD)
    esperado = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25)) - 0.5
    assert abs(lo - esperado) < 1e-12, f"χ_lo = {lo}"
    assert lo < up

    with pytest.raises(BoundsGapError):
        delta_chi_bidir(identity(), e, maps)
    assert abs(delta_chi_bidir(identity(), e, maps, strict=False)) < 1e-12


def test_limites_coincidem_com_correcoes_de_pauli():
    psi = _estado(4, (2, 3))
    e = build_bidirectional_ensemble(psi)
    maps = pauli_correction_maps(e.layout)
    for direction in (FORWARD, BACKWARD):
        lo, up = chi_interval(e, maps, direction)
        assert abs(lo - up) < 1e-10, f"{direction}: lo={lo}, up={up}"


def test_delta_chi_bidirecional_dobra_a_queda():
    ud = make_ud(0.6, 0.2, 0.05)
    psi = _estado(6)
    delta = delta_chi_bidir(ud, build_bidirectional_ensemble(psi))
    assert abs(delta + 2 * entanglement_change(ud, psi)) < 1e-9


@pytest.mark.parametrize("seed, dims", [(7, (2, 3)), (8, (2, 2)), (9, (3, 2)), (10, (1, 2)), (11, (3, 3))])
def test_ensemble_produto_com_mesmos_marginais(seed, dims):
    phi = _estado(seed, dims)
    produto = appendix_b_ensemble(phi)
    assert marginal_mismatch(produto, build_bidirectional_ensemble(phi)) < 1e-12, f"seed {seed}"


def test_marginais_do_produto():
    phi = _estado(7, (2, 3))
    ens_a, ens_b = product_marginal_ensembles(phi)
    assert len(ens_a.members) == len(ens_b.members) == 4
    assert ens_a.layout.dims == (2, 2) and ens_b.layout.dims == (2, 3)


def test_mapa_de_correcao_nao_unitario():
    with pytest.raises(ValidationError):
        CorrectionMaps(alice=((np.ones((2, 2)), 1),), bob=())


def test_cadeia_unidirecional():
    chain = oneway_chain(cnot(), CADEIA)
    assert is_canonical_form(chain.canonical_gate)
    assert chain.residual < 1e-12
    assert abs(chain.delta_chi - chain.search.value) < 1e-9


def test_cadeia_bidirecional():
    chain = bidir_chain(cnot(), CADEIA)
    assert chain.residual < 1e-10
    assert len(chain.lo_up) == 4
    assert abs(chain.delta_chi - 2 * chain.search.value) < 2e-9


@pytest.mark.slow
@pytest.mark.parametrize("fabrica", [cnot, swap] + [lambda s=s: random_gate(s) for s in range(5)])
def test_cadeias_igualam_capacidade_independente(fabrica):
    gate = fabrica()
    e_u = entangling_capability(gate, PADRAO).value

    uni = oneway_chain(gate, PADRAO)
    assert abs(uni.delta_chi - e_u) <= 2e-3, f"{gate.name}: Δχ→={uni.delta_chi}, E_U={e_u}"

    bi = bidir_chain(gate, PADRAO)
    assert bi.residual < 1e-10
    assert abs(bi.delta_chi - 2 * e_u) <= 4e-3, f"{gate.name}: Δχ↔={bi.delta_chi}, 2E_U={2 * e_u}"


@pytest.mark.slow
@pytest.mark.parametrize("fabrica, esperado", [(cnot, 2.0), (swap, 4.0)])
def test_cadeia_de_igualdades_cnot_e_swap(fabrica, esperado):
    gate = fabrica()
    e_u = entangling_capability(gate, PADRAO).value
    bi = bidir_chain(gate, PADRAO)
    for elo in (2 * e_u, 2 * bi.search.value, bi.delta_chi):
        assert abs(elo - esperado) <= 4e-3, f"{gate.name}: elo {elo} ≠ {esperado}"
