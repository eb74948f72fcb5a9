"""
Testes da execução de roteiros, superposição de mensagens e protocolo reverso.
"""

import numpy as np
import pytest

from gatecap.modules.bounds import EPS_CAP, chained_fidelity_bound, holevo_lower_bound
from gatecap.modules.canonical import random_gate
from gatecap.modules.ensembles import holevo_chi
from gatecap.modules.error_handler import LayoutError, NonUnitaryError, ValidationError
from gatecap.modules.protocol import (
    S_U, S_U_E, LocalOp, LocalStep, ProtocolScript, as_unitary, canonicalize_script,
    classify_rate_set, copy_unitary, eta_entanglement, evolve, inverse_script, message_fidelity,
    rate_pair_achieved, receiver_ensembles, reverse_protocol, reversed_round_fidelity, run,
    superposition_gain, superposition_overlap, superposition_state, uhlmann_split,
)
from gatecap.modules.qmath import is_unitary, random_state
from gatecap.modules.roteiros import (
    X, cnot_assisted, cnot_forward, identity_script, noisy_cnot_forward, ry, swap_assisted,
    swap_exchange,
)

EXATO = 1e-12


@pytest.mark.parametrize("fabrica", [
    cnot_forward, swap_exchange, cnot_assisted, lambda: cnot_assisted(extra_bell=True),
    swap_assisted, identity_script,
])
def test_roteiros_distribuidos_sao_exatos(fabrica):
    script = fabrica()
    result = message_fidelity(script)
    assert result.eps < EXATO, f"{script.name}: ε = {result.eps}"
    assert len(result.eps_xy) == 2 ** (script.n_a + script.n_b)


def test_ruido_em_b1():
    assert abs(message_fidelity(noisy_cnot_forward(np.pi)).eps - 1.0) < EXATO
    theta = np.pi / 3
    assert abs(message_fidelity(noisy_cnot_forward(theta)).eps - np.sin(theta / 2) ** 2) < EXATO


def test_pares_em_paralelo():
    script = swap_assisted()
    serial = message_fidelity(script)
    paralelo = message_fidelity(script, workers=4)
    assert serial.eps_xy == paralelo.eps_xy


def test_mensagem_fora_do_intervalo():
    with pytest.raises(ValidationError):
        run(cnot_forward(), 2, 0)
    with pytest.raises(ValidationError):
        run(cnot_forward(), 0, 1)


@pytest.mark.parametrize("fabrica, esperado", [
    (cnot_forward, 1.0),
    (swap_exchange, 2.0),
    (cnot_assisted, 2.0),
    (lambda: cnot_assisted(extra_bell=True), 3.0),
    (swap_assisted, 4.0),
])
def test_emaranhamento_da_superposicao(fabrica, esperado):
    script = fabrica()
    result = message_fidelity(script)
    fechada = eta_entanglement(script, result=result)
    direta = eta_entanglement(script, direct=True, result=result)
    assert abs(fechada - esperado) < 1e-9, f"{script.name}: forma fechada {fechada}"
    assert abs(direta - fechada) < 1e-9, f"{script.name}: direta {direta} ≠ fechada {fechada}"


def test_ganho_da_superposicao():
    assert abs(superposition_gain(cnot_assisted()) - 1.0) < 1e-9
    assert abs(superposition_gain(swap_exchange()) - 2.0) < 1e-9


def test_sobreposicao_com_ruido():
    script = noisy_cnot_forward(0.3)
    result = message_fidelity(script)
    overlap = superposition_overlap(script, result)
    assert overlap >= 1 - result.eps - EXATO, f"|⟨η|η_ε⟩|² = {overlap}, ε = {result.eps}"
    assert overlap <= 1 + EXATO


def test_decomposicao_de_uhlmann():
    final = run(cnot_forward(), 1, 0)
    split = uhlmann_split(final, 1, 0)
    assert split.eps < EXATO and split.e is None
    assert abs(split.c.amplitudes[2]) == pytest.approx(1.0), "c_xy = |x⟩_a|0⟩_b"

    ruidoso = run(noisy_cnot_forward(0.4), 0, 0)
    split = uhlmann_split(ruidoso, 0, 0)
    assert split.eps == pytest.approx(np.sin(0.2) ** 2)
    assert split.e is not None

    with pytest.raises(ValidationError):
        uhlmann_split(run(noisy_cnot_forward(np.pi), 0, 0), 0, 0)


def test_ensembles_do_receptor():
    ens_alice, ens_bob = receiver_ensembles(cnot_forward())
    assert len(ens_bob.members) == 2 and len(ens_alice.members) == 1
    assert abs(holevo_chi(ens_bob) - 1.0) < EXATO
    assert holevo_chi(ens_alice) < EXATO


def test_inverso_desfaz_a_evolucao():
    script = cnot_assisted()
    psi = random_state(script.layout, np.random.default_rng(12))
    volta = evolve(inverse_script(script), evolve(script, psi))
    assert np.allclose(volta.amplitudes, psi.amplitudes, atol=1e-12)


def test_roteiro_canonico_equivalente():
    script = cnot_assisted()
    canonico = canonicalize_script(script)
    for x, y in script.messages():
        a, b = run(script, x, y), run(canonico, x, y)
        assert abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("fabrica", [lambda: canonicalize_script(cnot_assisted()), swap_assisted])
def test_protocolo_reverso(fabrica):
    script = fabrica()
    rev = reverse_protocol(script)
    assert rev.t == 2 * script.t, "Reverso usa 2t aplicações da porta"
    for x, y in script.messages():
        fidelidade = reversed_round_fidelity(script, x, y, rev)
        assert fidelidade >= 1 - 1e-9, f"{script.name} (x={x}, y={y}): {fidelidade}"


def test_reverso_exige_forma_canonica():
    base = identity_script()
    script = ProtocolScript(
        gate=random_gate(7),
        layout=base.layout,
        n_a=0,
        n_b=0,
        steps=base.steps,
        initial_ancilla=base.initial_ancilla,
    )
    with pytest.raises(ValidationError):
        reverse_protocol(script)


def test_pares_de_taxa():
    assert rate_pair_achieved(cnot_forward(), 1e-9) == (1.0, 0.0)
    assert rate_pair_achieved(swap_exchange(), 1e-9) == (1.0, 1.0)
    assert rate_pair_achieved(swap_assisted(), 1e-9) == (2.0, 2.0)
    assert rate_pair_achieved(noisy_cnot_forward(np.pi), 1e-9) is None
    with pytest.raises(ValidationError):
        rate_pair_achieved(identity_script(t=0), 1e-9)


def test_classificacao_do_conjunto_de_taxas():
    assert classify_rate_set(cnot_forward()) == S_U
    assert classify_rate_set(cnot_assisted()) == S_U_E


def test_operacao_de_outra_parte():
    base = cnot_forward()
    with pytest.raises(LayoutError):
        ProtocolScript(
            gate=base.gate,
            layout=base.layout,
            n_a=1,
            n_b=0,
            steps=(LocalStep(alice=(LocalOp(X, (3,)),)), LocalStep()),
            initial_ancilla=base.initial_ancilla,
        )


def test_ancila_com_dimensao_errada():
    base = cnot_forward()
    with pytest.raises(LayoutError):
        ProtocolScript(
            gate=base.gate,
            layout=base.layout,
            n_a=1,
            n_b=0,
            steps=base.steps,
            initial_ancilla=random_state(base.layout.subset([0, 1, 2]), np.random.default_rng(0)),
        )


def test_as_unitary_projeta_ou_rejeita():
    quase = np.eye(2) + 1e-10 * np.array([[1, 0], [0, 0]])
    projetada = as_unitary(quase)
    assert is_unitary(projetada, 1e-13)
    with pytest.raises(NonUnitaryError):
        as_unitary(np.eye(2) * 1.01)


def test_copy_unitary():
    copia = copy_unitary(3)
    assert is_unitary(copia)
    assert copia[1 * 3 + 0, 1 * 3 + 2] == 1.0, "|1⟩|2⟩ → |1⟩|0⟩ (mod 3)"


def test_estado_de_superposicao():
    script = swap_exchange()
    eta = superposition_state(script)
    assert eta.layout.size == 2 * script.layout.size * 2, "Cópias de x e y envolvem o layout do roteiro"
    assert abs(np.linalg.norm(eta.amplitudes) - 1.0) < EXATO
    assert eta.layout.labels[0] == "A_msg_copy" and eta.layout.labels[-1] == "B_msg_copy"


@pytest.mark.slow
def test_varredura_de_limites_com_ruido():
    rng = np.random.default_rng(2024)
    theta_max = 2 * np.arcsin(np.sqrt(EPS_CAP))
    for theta in rng.uniform(0.0, 0.9 * np.pi, size=1000):
        script = noisy_cnot_forward(theta)
        result = message_fidelity(script)
        overlap = superposition_overlap(script, result)
        assert overlap >= 1 - result.eps - 1e-10, f"θ={theta}: {overlap} < 1 − {result.eps}"

    for theta in rng.uniform(0.0, theta_max, size=1000):
        script = noisy_cnot_forward(theta)
        result = message_fidelity(script)
        _, ens_bob = receiver_ensembles(script, result)
        limite = holevo_lower_bound(script.n_a, 1, result.eps)
        assert holevo_chi(ens_bob) >= limite - 1e-10, f"θ={theta}: χ abaixo de {limite}"


def _cnot_assistida_com_ruido(theta):
    base = cnot_assisted()
    ultimo = base.steps[-1]
    return ProtocolScript(
        gate=base.gate,
        layout=base.layout,
        n_a=1,
        n_b=1,
        steps=(base.steps[0], LocalStep(ultimo.alice, ultimo.bob + (LocalOp(ry(theta), (3,)),))),
        initial_ancilla=base.initial_ancilla,
        name=f"cnot-assisted-ry({theta:g})",
    )


@pytest.mark.parametrize("theta", [0.05, 0.2])
def test_protocolo_reverso_com_ruido(theta):
    script = _cnot_assistida_com_ruido(theta)
    eps = message_fidelity(script).eps
    assert eps == pytest.approx(np.sin(theta / 2) ** 2, abs=1e-12)

    rev = reverse_protocol(script)
    limite = chained_fidelity_bound(1, eps)
    for x, y in script.messages():
        fidelidade = reversed_round_fidelity(script, x, y, rev)
        assert fidelidade >= limite - 1e-9, f"θ={theta} (x={x}, y={y}): {fidelidade} < {limite}"
