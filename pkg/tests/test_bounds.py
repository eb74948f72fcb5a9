"""
Testes das fórmulas fechadas de limites.
"""

import numpy as np
import pytest

from gatecap.modules.bounds import (
    EPS_CAP, ancilla_bound, bounds_report, chained_fidelity_bound, entanglement_gain_lower_bound,
    epsilon_threshold, eta_continuity_bound, fannes_terms, holevo_lower_bound, message_rate_bound,
    q_constant, rate_gap, unassisted_rate_check, unassisted_rates,
)
from gatecap.modules.error_handler import ValidationError


def test_limiar_de_fidelidade():
    assert epsilon_threshold(2, 2, 1, 1) == pytest.approx(1 / 65536, rel=1e-12)
    assert epsilon_threshold(1, 1, 1, 1) == 0.0, "Sem folga de taxa não há limiar"
    assert epsilon_threshold(1, 3, 0.5, 1) == pytest.approx(min((0.5 / 96) ** 2, (0.5 / 16) ** 4))
    assert epsilon_threshold(100, 100, 0, 0) == pytest.approx((1 / 32) ** 2)
    assert epsilon_threshold(100, 100, 0, 0) < EPS_CAP


def test_folga_de_taxa():
    assert rate_gap(2, 3, 1, 1) == (1.0, 3.0)
    assert rate_gap(0.5, 0.5, 0, 0) == (0.5, 1.0)


def test_taxa_negativa():
    with pytest.raises(ValidationError):
        epsilon_threshold(-1, 2, 0, 0)


def test_dimensao_de_ancila():
    K, limite = ancilla_bound(2, 4, 1)
    assert K == 6.0 and limite == 64.0
    K, limite = ancilla_bound(1, 1, 2, M=3)
    assert K == 1.0 and limite == 2.0 ** 6
    with pytest.raises(ValidationError):
        ancilla_bound(2, 4, 0)


def test_fidelidade_encadeada():
    assert chained_fidelity_bound(10, 1e-6) == pytest.approx(0.96, abs=1e-12)
    assert chained_fidelity_bound(10, 1e-6, eps_psi=0.01) == pytest.approx(0.95, abs=1e-12)
    assert chained_fidelity_bound(10, 0.01) == 0.0, "Truncado em zero"
    with pytest.raises(ValidationError):
        chained_fidelity_bound(0, 1e-6)


def test_constantes():
    assert round(q_constant(), 4) == 0.5307
    assert message_rate_bound(2.0) == 4.0
    assert holevo_lower_bound(1, 1, 0.0) == 1.0


def test_termos_de_fannes():
    termos = fannes_terms(1e-4, 1)
    assert termos["trace_distance_max"] == pytest.approx(0.02)
    assert termos["fannes"] == pytest.approx(0.02 - 0.02 * np.log2(0.02))
    assert fannes_terms(0.1, 1)["fannes"] is None, "T = 2√0.1 > 1/e"


def test_superposicao():
    Q = q_constant()
    assert eta_continuity_bound(0.0, 2, 6.0, 1) == pytest.approx(Q)
    assert eta_continuity_bound(1e-4, 1, 2.0, 1) == pytest.approx(0.01 * 6 + Q)
    assert entanglement_gain_lower_bound(1, 1, 1, 0.0, 0.0, 4.0) == pytest.approx(2 - 2 * Q)


def test_checagem_sem_emaranhamento_previo():
    assert unassisted_rate_check(1, 6.0, 1.0, 0.0, 1, 1, 2, 2) == (False, False)
    assert unassisted_rate_check(10, 6.0, 1.0, 0.0, 1, 1, 2, 2) == (True, True)
    assert unassisted_rate_check(10, 6.0, 1.0, 0.0, 1, 1, 2, 1.1) == (True, False)
    with pytest.raises(ValidationError):
        unassisted_rate_check(1, 6.0, 0.0, 0.0, 1, 1, 2, 2)


def test_taxas_sem_emaranhamento_previo():
    fwd, bwd = unassisted_rates(10, 1, 6.0, 1.0, 0.0, 2.0, 1.0)
    assert fwd == pytest.approx(20 / 23)
    assert bwd == pytest.approx(10 / 23)


def test_relatorio_consolidado():
    report = bounds_report((2, 2, 1, 1), n=2, d=4, tau=1)
    assert report.epsilon_threshold == pytest.approx(1 / 65536)
    assert report.K == 6.0
    assert report.fannes is not None
    assert report.chained_fidelity == pytest.approx(1 - 4 / 256)
    dados = report.to_dict()
    assert set(dados) >= {"epsilon_threshold", "K", "Q", "holevo_lower_bound", "rate_check_forward"}
