"""
Módulo de Capacidade de Emaranhamento
=====================================

Estima E_U (máximo aumento de emaranhamento numa aplicação da porta) e
E_U⁻ (máxima diminuição) por subida de gradiente projetada sobre a esfera
unitária de estados puros estendidos com ancilas.

Layout usado em toda a busca:

| Índice | Subsistema | Parte | Dimensão |
|--------|------------|-------|----------|
| 0      | ancila A   | Alice | dA       |
| 1      | qubit A    | Alice | 2        |
| 2      | qubit B    | Bob   | 2        |
| 3      | ancila B   | Bob   | dB       |

Cada reinício parte de um estado Haar-aleatório semeado por (seed, k);
os reinícios rodam em paralelo e o resultado é combinado por uma redução
determinística (maior valor; empates resolvidos pelo menor índice).
Os valores reportados são LIMITES INFERIORES para as dimensões de ancila
configuradas.

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from gatecap.modules.canonical import Gate, is_canonical_form
from gatecap.modules.error_handler import ValidationError
from gatecap.modules.qmath import (
    ALICE, ANCILLA, BOB, ENTROPY_CLAMP, GATE_QUBIT,
    PartitionedState, SubsystemLayout, apply_operator, conjugate,
    entanglement_entropy, log2m, make_layout, random_state,
)

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

ENTANGLING = +1
DISENTANGLING = -1

TIE_ATOL = 1e-12
STALL_ATOL = 1e-11

# Busca linear com retrocesso (Armijo)
LINE_CONTRACTION = 0.5
LINE_OPTIMISM = 2.0
LINE_SUFFICIENT_DECREASE = 1e-4
LINE_MAX_STEPS = 25
INITIAL_STEP = 0.5


# =============================================================================
# TIPOS
# =============================================================================

@dataclass(frozen=True)
class CapacitySearchConfig:
    """Parâmetros da busca multi-início."""
    ancilla_dim_A: int = 2
    ancilla_dim_B: int = 2
    restarts: int = 32
    max_iterations: int = 400
    gradient_tolerance: float = 1e-9
    seed: int = 0
    workers: int = 1
    check_gradient: bool = False

    def __post_init__(self):
        if self.ancilla_dim_A < 1 or self.ancilla_dim_B < 1:
            raise ValidationError("Dimensões de ancila devem ser ≥ 1", field="ancilla_dims")
        if self.restarts < 1:
            raise ValidationError("restarts deve ser ≥ 1", field="restarts")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations deve ser ≥ 1", field="max_iterations")
        if self.gradient_tolerance < 0:
            raise ValidationError("gradient_tolerance não pode ser negativo", field="gradient_tolerance")
        if self.workers < 1:
            raise ValidationError("workers deve ser ≥ 1", field="workers")

    @classmethod
    def from_config(cls, config: Dict, **overrides) -> "CapacitySearchConfig":
        """Monta a partir do dict de gatecap.modules.config (flags têm precedência)."""
        dims = overrides.pop("ancilla_dims", None) or config.get("ancilla_dims", (2, 2))
        values = {
            "ancilla_dim_A": int(dims[0]),
            "ancilla_dim_B": int(dims[1]),
            "restarts": config.get("restarts", 32),
            "max_iterations": config.get("max_iterations", 400),
            "gradient_tolerance": config.get("gradient_tolerance", 1e-9),
            "seed": config.get("seed", 0),
            "workers": config.get("workers", 1),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True, eq=False)
class CapacityReport:
    """Resultado de uma busca; `value` é sempre reproduzível a partir de `best_state`."""
    value: float
    best_state: PartitionedState
    per_restart_values: Tuple[float, ...]
    converged: bool
    direction: int = ENTANGLING
    iterations: int = 0
    initial_entanglement: float = 0.0
    final_entanglement: float = 0.0
    gradient_error: Optional[float] = None
    config: Optional[CapacitySearchConfig] = field(default=None, repr=False)


@dataclass
class _RestartResult:
    index: int
    value: float
    state: PartitionedState
    converged: bool
    iterations: int


# =============================================================================
# FUNÇÕES AUXILIARES
# =============================================================================

def capability_layout(dim_a: int = 2, dim_b: int = 2) -> SubsystemLayout:
    """Layout (ancila A, qubit A, qubit B, ancila B)."""
    return make_layout([
        ("A_anc", dim_a, ALICE, ANCILLA),
        ("A_U", 2, ALICE, GATE_QUBIT),
        ("B_U", 2, BOB, GATE_QUBIT),
        ("B_anc", dim_b, BOB, ANCILLA),
    ])


def _check_gate(gate) -> Gate:
    if not isinstance(gate, Gate):
        gate = Gate(gate)
    return gate


def entanglement_change(gate: Gate, psi: PartitionedState) -> float:
    """E(Uψ) − E(ψ), com U agindo nos gate-qubits do layout de ψ."""
    gate = _check_gate(gate)
    targets = list(psi.layout.gate_qubits())
    after = apply_operator(psi, gate.matrix, targets)
    return entanglement_entropy(after) - entanglement_entropy(psi)


class _Objective:
    """
    f(ψ) = sinal · [E(Uψ) − E(ψ)] e seu gradiente euclidiano.

    Para Ψ (matriz Alice × Bob) e L = log₂ ρ_A regularizado, a variação de
    E é −2·Re⟨dΨ, LΨ⟩ (o termo proporcional a ψ some na projeção tangente).
    """

    def __init__(self, gate: Gate, layout: SubsystemLayout, direction: int):
        self.gate = gate
        self.layout = layout
        self.direction = direction
        self.targets = list(layout.gate_qubits())
        self.alice = layout.indices(ALICE)
        self.bob = layout.indices(BOB)
        if self.alice + self.bob != list(range(len(layout))):
            raise ValidationError("Busca exige layout com Alice antes de Bob")
        self.dim_alice = layout.dim_of(self.alice)

    def _entropy_and_grad(self, amps: np.ndarray) -> Tuple[float, np.ndarray]:
        psi_m = amps.reshape(self.dim_alice, -1)
        rho = psi_m @ psi_m.conj().T
        rho = (rho + rho.conj().T) / 2
        w = np.linalg.eigvalsh(rho)
        w = w[w > ENTROPY_CLAMP]
        entropy = float(-np.sum(w * np.log2(w)))
        grad = -2.0 * (log2m(rho) @ psi_m)
        return entropy, grad.reshape(-1)

    def _apply(self, amps: np.ndarray, matrix: np.ndarray) -> np.ndarray:
        state = PartitionedState(amps / np.linalg.norm(amps), self.layout)
        return apply_operator(state, matrix, self.targets).amplitudes * np.linalg.norm(amps)

    def value_and_gradient(self, amps: np.ndarray) -> Tuple[float, np.ndarray, float, float]:
        phi = self._apply(amps, self.gate.matrix)
        e_in, g_in = self._entropy_and_grad(amps)
        e_out, g_out = self._entropy_and_grad(phi)
        g_out_pulled = self._apply(g_out, self.gate.matrix.conj().T) if np.any(g_out) else g_out
        grad = self.direction * (g_out_pulled - g_in)
        return self.direction * (e_out - e_in), grad, e_in, e_out

    def value(self, amps: np.ndarray) -> float:
        return self.value_and_gradient(amps)[0]


def _tangent(psi: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return grad - np.real(np.vdot(psi, grad)) * psi


def _retract(psi: np.ndarray, step: np.ndarray) -> np.ndarray:
    new = psi + step
    return new / np.linalg.norm(new)


def _ascend(objective: _Objective, psi0: np.ndarray, config: CapacitySearchConfig) -> Tuple[np.ndarray, float, bool, int]:
    """
    Subida de gradiente projetada com busca linear de Armijo.

    Returns:
        (estado final, valor, convergiu, iterações)
    """
    psi = psi0
    value, grad, _, _ = objective.value_and_gradient(psi)
    step = INITIAL_STEP
    for iteration in range(1, config.max_iterations + 1):
        direction = _tangent(psi, grad)
        norm_sq = float(np.real(np.vdot(direction, direction)))
        if np.sqrt(norm_sq) < config.gradient_tolerance:
            return psi, value, True, iteration

        accepted = False
        s = step
        for _ in range(LINE_MAX_STEPS):
            candidate = _retract(psi, s * direction)
            cand_value = objective.value(candidate)
            if cand_value >= value + LINE_SUFFICIENT_DECREASE * s * norm_sq:
                accepted = True
                break
            s *= LINE_CONTRACTION
        if not accepted:
            # sem passo de subida suficiente: ponto estacionário numérico
            return psi, value, True, iteration

        improvement = cand_value - value
        psi = candidate
        value, grad, _, _ = objective.value_and_gradient(psi)
        step = s * LINE_OPTIMISM
        if improvement < STALL_ATOL:
            return psi, value, True, iteration

    return psi, value, False, config.max_iterations


def _single_restart(gate: Gate, layout: SubsystemLayout, direction: int,
                    config: CapacitySearchConfig, index: int) -> _RestartResult:
    rng = np.random.default_rng([config.seed, index])
    start = random_state(layout, rng)
    objective = _Objective(gate, layout, direction)
    amps, _, converged, iterations = _ascend(objective, start.amplitudes, config)
    state = PartitionedState(amps, layout)
    value = direction * entanglement_change(gate, state)
    if not converged:
        logger.debug(f"🔁 Reinício {index} atingiu o limite de {iterations} iterações")
    return _RestartResult(index, value, state, converged, iterations)


def _fold(results: Sequence[_RestartResult]) -> _RestartResult:
    """Maior valor; empates (±1e-12) vão para o menor índice."""
    best = None
    for result in sorted(results, key=lambda r: r.index):
        if best is None or result.value > best.value + TIE_ATOL:
            best = result
    return best


def _search(gate, config: CapacitySearchConfig, direction: int) -> CapacityReport:
    gate = _check_gate(gate)
    config = config or CapacitySearchConfig()
    layout = capability_layout(config.ancilla_dim_A, config.ancilla_dim_B)
    nome = "emaranhamento" if direction == ENTANGLING else "desemaranhamento"
    logger.info(
        f"🚀 Busca de {nome} para '{gate.name}': {config.restarts} reinícios, "
        f"ancilas {config.ancilla_dim_A}x{config.ancilla_dim_B}, seed={config.seed}"
    )

    results: Dict[int, _RestartResult] = {}
    if config.workers > 1 and config.restarts > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            futures = {
                executor.submit(_single_restart, gate, layout, direction, config, k): k
                for k in range(config.restarts)
            }
            for future in as_completed(futures):
                result = future.result()
                results[result.index] = result
    else:
        for k in range(config.restarts):
            results[k] = _single_restart(gate, layout, direction, config, k)

    ordered = [results[k] for k in range(config.restarts)]
    best = _fold(ordered)

    after = apply_operator(best.state, gate.matrix, list(layout.gate_qubits()))
    e_in = entanglement_entropy(best.state)
    e_out = entanglement_entropy(after)

    gradient_error = None
    if config.check_gradient:
        gradient_error = gradient_check(gate, best.state, direction)

    if best.converged:
        logger.info(f"✅ {nome.capitalize()} de '{gate.name}': {best.value:.6f} ebits")
    else:
        logger.warning(f"⚠️ Busca de {nome} não convergiu (melhor valor {best.value:.6f})")

    return CapacityReport(
        value=float(best.value),
        best_state=best.state,
        per_restart_values=tuple(float(r.value) for r in ordered),
        converged=bool(best.converged),
        direction=direction,
        iterations=best.iterations,
        initial_entanglement=e_in,
        final_entanglement=e_out,
        gradient_error=gradient_error,
        config=config,
    )


# =============================================================================
# OPERAÇÕES PÚBLICAS
# =============================================================================

def entangling_capability(gate, config: Optional[CapacitySearchConfig] = None) -> CapacityReport:
    """
    Limite inferior para E_U nas dimensões de ancila configuradas.

    Raises:
        NonUnitaryError: porta não unitária
    """
    return _search(gate, config, ENTANGLING)


def disentangling_capability(gate, config: Optional[CapacitySearchConfig] = None) -> CapacityReport:
    """Limite inferior para E_U⁻ (valor positivo = queda de emaranhamento)."""
    return _search(gate, config, DISENTANGLING)


def conjugate_witness(gate, maximizer: PartitionedState) -> PartitionedState:
    """
    Retorna U_d*·conj(ψ) = U_d†·conj(ψ).

    Aplicar U_d ao resultado diminui o emaranhamento exatamente no quanto
    U_d aumenta o de ψ.

    Raises:
        ValidationError: porta fora da forma canônica (U* ≠ U†)
    """
    gate = _check_gate(gate)
    if not is_canonical_form(gate):
        raise ValidationError("conjugate_witness exige porta na forma U_d (aplique decompose antes)", field="gate")
    targets = list(maximizer.layout.gate_qubits())
    return apply_operator(conjugate(maximizer), gate.matrix.conj(), targets)


def gradient_check(gate, psi: PartitionedState, direction: int = ENTANGLING, h: float = 1e-6) -> float:
    """
    Compara o gradiente analítico com diferenças finitas centrais ao longo
    das direções coordenadas projetadas no espaço tangente.

    Returns:
        Maior desvio absoluto entre as derivadas direcionais
    """
    gate = _check_gate(gate)
    objective = _Objective(gate, psi.layout, direction)
    amps = psi.amplitudes.copy()
    _, grad, _, _ = objective.value_and_gradient(amps)
    worst = 0.0
    n = amps.size
    for k in range(2 * n):
        e = np.zeros(n, dtype=complex)
        e[k % n] = 1.0 if k < n else 1j
        d = _tangent(amps, e)
        analytic = float(np.real(np.vdot(grad, d)))
        numeric = (objective.value(_retract(amps, h * d)) - objective.value(_retract(amps, -h * d))) / (2 * h)
        worst = max(worst, abs(analytic - numeric))
    return worst


# =============================================================================
# VARIANTE: ENTRADAS PRODUTO SEM ANCILAS
# =============================================================================

def product_state_capability(gate, config: Optional[CapacitySearchConfig] = None) -> CapacityReport:
    """
    Maior emaranhamento gerado a partir de entradas produto |a⟩|b⟩ sem ancilas.

    Cada fator é mantido na sua própria esfera; o gradiente em ψ = a⊗b é
    puxado para cada fator (G·b* para a, Gᵀ·a* para b).
    """
    gate = _check_gate(gate)
    config = config or CapacitySearchConfig()
    layout = capability_layout(1, 1)
    objective = _Objective(gate, layout, ENTANGLING)
    values: List[float] = []
    best_value, best_state, best_converged, best_iter = None, None, False, 0

    for index in range(config.restarts):
        rng = np.random.default_rng([config.seed, index])
        a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        value, grad, _, _ = objective.value_and_gradient(np.kron(a, b))
        step, converged, iterations = INITIAL_STEP, False, config.max_iterations
        for iteration in range(1, config.max_iterations + 1):
            g = grad.reshape(2, 2)
            da = _tangent(a, g @ b.conj())
            db = _tangent(b, g.T @ a.conj())
            norm_sq = float(np.real(np.vdot(da, da) + np.vdot(db, db)))
            if np.sqrt(norm_sq) < config.gradient_tolerance:
                converged, iterations = True, iteration
                break
            s, accepted = step, False
            for _ in range(LINE_MAX_STEPS):
                ca, cb = _retract(a, s * da), _retract(b, s * db)
                cand = objective.value(np.kron(ca, cb))
                if cand >= value + LINE_SUFFICIENT_DECREASE * s * norm_sq:
                    accepted = True
                    break
                s *= LINE_CONTRACTION
            if not accepted:
                converged, iterations = True, iteration
                break
            improvement = cand - value
            a, b = ca, cb
            value, grad, _, _ = objective.value_and_gradient(np.kron(a, b))
            step = s * LINE_OPTIMISM
            if improvement < STALL_ATOL:
                converged, iterations = True, iteration
                break

        values.append(float(value))
        if best_value is None or value > best_value + TIE_ATOL:
            best_value, best_converged, best_iter = value, converged, iterations
            best_state = PartitionedState(np.kron(a, b), layout)

    after = apply_operator(best_state, gate.matrix, [1, 2])
    return CapacityReport(
        value=float(entanglement_change(gate, best_state)),
        best_state=best_state,
        per_restart_values=tuple(values),
        converged=best_converged,
        direction=ENTANGLING,
        iterations=best_iter,
        initial_entanglement=entanglement_entropy(best_state),
        final_entanglement=entanglement_entropy(after),
        config=config,
    )
