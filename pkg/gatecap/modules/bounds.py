"""
Módulo Centralizado de Limites Quantitativos
============================================

Fórmulas fechadas usadas na análise de taxas de comunicação: limiar de
fidelidade, dimensão de ancila, fidelidade encadeada, limite de Holevo do
receptor e a checagem de taxas sem emaranhamento prévio.

Todas as funções são puras e determinísticas. Logaritmos em base 2.

Terminologia:
-------------
- R'→, R'←: taxas alcançadas pelo esquema de bloco
- R→, R←:   taxas alvo (estritamente menores)
- ΔR:       menor folga entre as duas direções
- R_max:    max{R'→, R'←, 1}
- τ:        aplicações da porta por bloco; M blocos; t = Mτ
- K:        (2n + log d)/τ, com n = max(n_a, n_b)
- Q:        log₂(e)/e

Exemplos:
---------
| Entrada                       | Função                 | Resultado     |
|-------------------------------|------------------------|---------------|
| R' = (2, 2), R = (1, 1)       | epsilon_threshold      | (1/16)⁴       |
| n = 2, d = 4, τ = 1           | ancilla_bound          | K = 6         |
| M = 10, ε = 1e-6              | chained_fidelity_bound | 0.96          |
| M = 10, ε = 1e-6, ε_ψ = 0.01  | chained_fidelity_bound | 0.95          |

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from gatecap.modules.error_handler import ValidationError
from gatecap.modules.qmath import fannes_bound

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

EPS_CAP = (1 / (2 * np.e)) ** 2


def _check_nonnegative(**valores) -> None:
    for nome, valor in valores.items():
        if valor is None:
            continue
        if not np.isfinite(valor) or valor < 0:
            raise ValidationError(f"{nome} deve ser finito e não negativo (recebido {valor})", field=nome)


def q_constant() -> float:
    """Q = log₂(e)/e ≈ 0.5307."""
    return float(np.log2(np.e) / np.e)


# =============================================================================
# TAXAS E LIMIAR DE FIDELIDADE
# =============================================================================

def rate_gap(r_fwd_prime: float, r_bwd_prime: float, r_fwd: float, r_bwd: float) -> Tuple[float, float]:
    """Retorna (ΔR, R_max)."""
    delta = min(r_fwd_prime - r_fwd, r_bwd_prime - r_bwd)
    r_max = max(r_fwd_prime, r_bwd_prime, 1.0)
    return float(delta), float(r_max)


def epsilon_threshold(r_fwd_prime: float, r_bwd_prime: float, r_fwd: float, r_bwd: float) -> float:
    """
    min{(ΔR/32R_max)², (ΔR/16)⁴, (1/2e)²}; zero quando ΔR ≤ 0.

    Examples:
        >>> f"{epsilon_threshold(2, 2, 1, 1):.4e}"
        '1.5259e-05'
        >>> epsilon_threshold(1, 1, 1, 1)
        0.0
    """
    _check_nonnegative(r_fwd_prime=r_fwd_prime, r_bwd_prime=r_bwd_prime, r_fwd=r_fwd, r_bwd=r_bwd)
    delta, r_max = rate_gap(r_fwd_prime, r_bwd_prime, r_fwd, r_bwd)
    if delta <= 0:
        return 0.0
    return float(min((delta / (32 * r_max)) ** 2, (delta / 16) ** 4, EPS_CAP))


# =============================================================================
# DIMENSÃO DE ANCILA E TAXA DE MENSAGENS
# =============================================================================

def ancilla_bound(n: int, d: int, tau: int, M: int = 1) -> Tuple[float, float]:
    """
    K = (2n + log₂d)/τ e o limite 2^{K·Mτ} para a dimensão total da ancila.

    Raises:
        ValidationError: τ < 1, d < 1 ou n < 0
    """
    if tau < 1:
        raise ValidationError("tau deve ser ≥ 1", field="tau")
    if d < 1:
        raise ValidationError("d deve ser ≥ 1", field="d")
    if M < 1:
        raise ValidationError("M deve ser ≥ 1", field="M")
    _check_nonnegative(n=n)
    K = (2 * n + np.log2(d)) / tau
    return float(K), float(2.0 ** (K * M * tau))


def message_rate_bound(r_max: float) -> float:
    """K_n = 2R_max: comunicação total por direção ≤ t·K_n."""
    _check_nonnegative(r_max=r_max)
    return 2.0 * float(r_max)


# =============================================================================
# FIDELIDADE E HOLEVO
# =============================================================================

def chained_fidelity_bound(M: int, eps: float, eps_psi: float = 0.0) -> float:
    """
    1 − ε_ψ − 4M√ε, truncado em zero.

    Examples:
        >>> chained_fidelity_bound(1, 0.0)
        1.0
        >>> round(chained_fidelity_bound(10, 1e-6), 12)
        0.96
    """
    if M < 1:
        raise ValidationError("M deve ser ≥ 1", field="M")
    _check_nonnegative(eps=eps, eps_psi=eps_psi)
    return float(max(0.0, 1.0 - eps_psi - 4 * M * np.sqrt(eps)))


def holevo_lower_bound(n_recv: int, n: int, eps: float) -> float:
    """χ do receptor ≥ n_recv − 4n√ε − 4ε^{1/4} (válido para ε ≤ (1/2e)²)."""
    _check_nonnegative(n_recv=n_recv, n=n, eps=eps)
    if eps > EPS_CAP:
        logger.warning(f"⚠️ ε={eps:.3e} acima de (1/2e)²; limite de Holevo fora da hipótese")
    return float(n_recv - 4 * n * np.sqrt(eps) - 4 * eps ** 0.25)


def fannes_terms(eps: float, n: int) -> Dict[str, Optional[float]]:
    """
    T ≤ 2√ε e o termo de Fannes correspondente em dimensão 2ⁿ
    (None quando T > 1/e).
    """
    _check_nonnegative(eps=eps, n=n)
    T = float(2 * np.sqrt(eps))
    termo = fannes_bound(T, 2 ** int(n)) if T <= 1 / np.e else None
    return {"trace_distance_max": T, "fannes": termo}


# =============================================================================
# SUPERPOSIÇÃO DE MENSAGENS
# =============================================================================

def eta_continuity_bound(eps: float, n: int, K: float, t: int) -> float:
    """|E(η) − E(η_ε)| ≤ √ε(4n + Kt) + Q."""
    _check_nonnegative(eps=eps, n=n, K=K, t=t)
    return float(np.sqrt(eps) * (4 * n + K * t) + q_constant())


def entanglement_gain_lower_bound(n_a: int, n_b: int, t: int, e_minus: float,
                                  eps: float, K: float) -> float:
    """t·E_U ≥ n_a + n_b − t·E_U⁻ − 2√ε(3n + Kt) − 2Q, com n = max(n_a, n_b)."""
    _check_nonnegative(n_a=n_a, n_b=n_b, t=t, e_minus=e_minus, eps=eps, K=K)
    n = max(n_a, n_b)
    return float(n_a + n_b - t * e_minus - 2 * np.sqrt(eps) * (3 * n + K * t) - 2 * q_constant())


# =============================================================================
# COMUNICAÇÃO SEM EMARANHAMENTO PRÉVIO
# =============================================================================

def unassisted_rate_check(M: int, K: float, E0: float, C: float,
                          r_fwd: float, r_bwd: float,
                          r_fwd_prime: float, r_bwd_prime: float) -> Tuple[bool, bool]:
    """
    Para cada direção: R' − R ≥ R·K/(4M·E0) + C·R·√K/(2M).

    Quando ambas valem, (R→/2, R←/2) é alcançável sem emaranhamento prévio.
    """
    if M < 1:
        raise ValidationError("M deve ser ≥ 1", field="M")
    if E0 <= 0:
        raise ValidationError("E0 deve ser positivo", field="E0")
    _check_nonnegative(K=K, C=C, r_fwd=r_fwd, r_bwd=r_bwd, r_fwd_prime=r_fwd_prime, r_bwd_prime=r_bwd_prime)

    def _holds(r: float, r_prime: float) -> bool:
        rhs = r * K / (4 * M * E0) + C * r * np.sqrt(K) / (2 * M)
        return bool(r_prime - r >= rhs)

    return _holds(r_fwd, r_fwd_prime), _holds(r_bwd, r_bwd_prime)


def unassisted_rates(M: int, tau: int, K: float, E0: float, C: float,
                     r_fwd_prime: float, r_bwd_prime: float) -> Tuple[float, float]:
    """Taxas por operação MτR'/(2Mτ + Kτ/(2E0) + C√K·τ) em cada direção."""
    if M < 1 or tau < 1:
        raise ValidationError("M e tau devem ser ≥ 1", field="M")
    if E0 <= 0:
        raise ValidationError("E0 deve ser positivo", field="E0")
    denominador = 2 * M * tau + K * tau / (2 * E0) + C * np.sqrt(K) * tau
    return float(M * tau * r_fwd_prime / denominador), float(M * tau * r_bwd_prime / denominador)


# =============================================================================
# RELATÓRIO CONSOLIDADO
# =============================================================================

@dataclass(frozen=True)
class BoundsReport:
    epsilon_threshold: float
    delta_r: float
    r_max: float
    K: float
    ancilla_dimension_bound: float
    K_n: float
    trace_distance_max: float
    fannes: Optional[float]
    Q: float
    holevo_lower_bound: float
    chained_fidelity: float
    rate_check_forward: bool
    rate_check_backward: bool
    unassisted_rate_forward: float
    unassisted_rate_backward: float

    def to_dict(self) -> Dict:
        return asdict(self)


def bounds_report(rates: Tuple[float, float, float, float], n: int, d: int, tau: int,
                  M: int = 1, eps: Optional[float] = None, eps_psi: float = 0.0,
                  E0: float = 1.0, C: float = 0.0) -> BoundsReport:
    """
    Avalia todas as fórmulas para um conjunto de parâmetros.

    Args:
        rates: (R'→, R'←, R→, R←)
        eps: fidelidade do bloco; quando None usa o limiar calculado
    """
    r_fwd_prime, r_bwd_prime, r_fwd, r_bwd = rates
    threshold = epsilon_threshold(r_fwd_prime, r_bwd_prime, r_fwd, r_bwd)
    delta, r_max = rate_gap(r_fwd_prime, r_bwd_prime, r_fwd, r_bwd)
    eps = threshold if eps is None else eps
    K, dim_bound = ancilla_bound(n, d, tau, M)
    fannes = fannes_terms(eps, n)
    fwd_ok, bwd_ok = unassisted_rate_check(M, K, E0, C, r_fwd, r_bwd, r_fwd_prime, r_bwd_prime)
    rate_fwd, rate_bwd = unassisted_rates(M, tau, K, E0, C, r_fwd_prime, r_bwd_prime)

    report = BoundsReport(
        epsilon_threshold=threshold,
        delta_r=delta,
        r_max=r_max,
        K=K,
        ancilla_dimension_bound=dim_bound,
        K_n=message_rate_bound(r_max),
        trace_distance_max=fannes["trace_distance_max"],
        fannes=fannes["fannes"],
        Q=q_constant(),
        holevo_lower_bound=holevo_lower_bound(n, n, eps),
        chained_fidelity=chained_fidelity_bound(M, eps, eps_psi),
        rate_check_forward=fwd_ok,
        rate_check_backward=bwd_ok,
        unassisted_rate_forward=rate_fwd,
        unassisted_rate_backward=rate_bwd,
    )
    logger.info(f"📐 Limites avaliados: ε*={threshold:.3e}, K={K:.4g}")
    return report
