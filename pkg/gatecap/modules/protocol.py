"""
Módulo de Protocolos de Comunicação
===================================

Execução exata (vetor de estado) de roteiros de protocolo: passos locais
V⁽⁰⁾, U, V⁽¹⁾, …, U, V⁽ᵗ⁾ aplicados a |x⟩_{A1}|y⟩_{B1}|ψ⟩_{A2B2}.

Sobre um roteiro são construídos:
- fidelidade das mensagens (ε_xy e ε = máx);
- ensembles do receptor;
- decomposição de Uhlmann do estado final (c_xy, ε_xy, e_xy);
- o estado de superposição de mensagens |η_ε⟩ e sua identidade de
  emaranhamento;
- o roteiro reverso sem emaranhamento prévio (2t aplicações da porta).

Registradores:
--------------
| Papel          | Alice | Bob | Conteúdo ao final (ε = 0)    |
|----------------|-------|-----|------------------------------|
| entrada        | A1    | B1  | y em A1, x em B1             |
| ancila         | A2    | B2  | |c_xy⟩                       |
| cópia (reverso)| A3    | B3  | x em A3, y em B3             |
| saída (reverso)| A4    | B4  | y em A4, x em B4             |

Os registradores A1 e B1 têm dimensão 2ⁿ com n = max(n_a, n_b).

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from gatecap.modules.canonical import Gate, decompose, is_canonical_form
from gatecap.modules.ensembles import Ensemble, mixture
from gatecap.modules.error_handler import LayoutError, NonUnitaryError, ValidationError
from gatecap.modules.qmath import (
    ALICE, BOB, COPY_REGISTER, MESSAGE,
    PartitionedState, SubsystemLayout, apply_operator, entanglement_entropy,
    make_layout, partial_trace,
)
from gatecap.modules.validacao import validar_unitaria

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

UNITARY_ATOL = 1e-10
PROJECTION_ATOL = 1e-8
IDEAL_ATOL = 1e-14
UNENTANGLED_ATOL = 1e-10

S_U = "S_U"
S_U_E = "S_U^E"


# =============================================================================
# TIPOS
# =============================================================================

def as_unitary(matrix, nome: str = "operação local") -> np.ndarray:
    """
    Aceita unitárias com resíduo ≤ 1e-10; entre 1e-10 e 1e-8 projeta na
    unitária mais próxima (decomposição polar); acima disso rejeita.
    """
    m = np.array(matrix, dtype=complex)
    valido, erro = validar_unitaria(m, nome, atol=PROJECTION_ATOL)
    if not valido:
        raise NonUnitaryError(erro)
    residual = np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]))
    if residual > UNITARY_ATOL:
        m, _ = scipy.linalg.polar(m)
        logger.debug(f"{nome}: projetada na unitária mais próxima (resíduo {residual:.2e})")
    return m


@dataclass(frozen=True, eq=False)
class LocalOp:
    """Unitária aplicada a `targets` (índices do layout, na ordem dada)."""
    matrix: np.ndarray
    targets: Tuple[int, ...]

    def __post_init__(self):
        matrix = as_unitary(self.matrix)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))

    def transpose(self) -> "LocalOp":
        return LocalOp(self.matrix.T, self.targets)

    def dagger(self) -> "LocalOp":
        return LocalOp(self.matrix.conj().T, self.targets)

    def shifted(self, offset: int) -> "LocalOp":
        return LocalOp(self.matrix, tuple(t + offset for t in self.targets))


@dataclass(frozen=True, eq=False)
class LocalStep:
    """Listas ordenadas de operações de Alice e de Bob (a primeira é aplicada primeiro)."""
    alice: Tuple[LocalOp, ...] = ()
    bob: Tuple[LocalOp, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob", tuple(self.bob))

    @property
    def ops(self) -> Tuple[LocalOp, ...]:
        return self.alice + self.bob


def _reversed_ops(ops: Sequence[LocalOp], transform: str) -> Tuple[LocalOp, ...]:
    return tuple(getattr(op, transform)() for op in reversed(ops))


@dataclass(frozen=True, eq=False)
class ProtocolScript:
    """
    Roteiro de protocolo com t = len(steps) − 1 aplicações da porta.

    `initial_ancilla` cobre todos os subsistemas que não são registradores
    de entrada, na ordem do layout.
    """
    gate: Gate
    layout: SubsystemLayout
    n_a: int
    n_b: int
    steps: Tuple[LocalStep, ...]
    initial_ancilla: PartitionedState
    input_registers: Tuple[int, ...] = ()
    output_registers: Tuple[int, ...] = ()
    name: str = "roteiro"
    gate_qubits: Tuple[int, int] = field(init=False)

    def __post_init__(self):
        layout = self.layout
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValidationError("Roteiro precisa de ao menos um passo local", field="steps")
        if self.n_a < 0 or self.n_b < 0:
            raise ValidationError("n_a e n_b devem ser ≥ 0", field="n_a")
        object.__setattr__(self, "gate_qubits", layout.gate_qubits())

        inputs = tuple(self.input_registers) or (
            _first(layout, ALICE, MESSAGE), _first(layout, BOB, MESSAGE)
        )
        outputs = tuple(self.output_registers) or inputs
        object.__setattr__(self, "input_registers", inputs)
        object.__setattr__(self, "output_registers", outputs)

        dim = 2 ** self.n
        for (ia, ib), nome in ((inputs, "entrada"), (outputs, "saída")):
            if layout.parties[ia] != ALICE or layout.parties[ib] != BOB:
                raise LayoutError(f"Registradores de {nome} devem ser (Alice, Bob)")
            if layout.dims[ia] != dim or layout.dims[ib] != dim:
                raise LayoutError(
                    f"Registradores de {nome} devem ter dimensão 2^n = {dim} "
                    f"(recebido {layout.dims[ia]}, {layout.dims[ib]})"
                )
            if set((ia, ib)) & set(self.gate_qubits):
                raise LayoutError(f"Registradores de {nome} não podem ser gate-qubits")

        for k, step in enumerate(self.steps):
            for party, ops in ((ALICE, step.alice), (BOB, step.bob)):
                for op in ops:
                    self._check_op(op, party, k)

        rest = self.ancilla_indices
        ancilla = self.initial_ancilla
        if ancilla.layout.dims != layout.subset(rest).dims:
            raise LayoutError(
                f"Ancila inicial com dims {ancilla.layout.dims}; esperado {layout.subset(rest).dims}"
            )
        object.__setattr__(self, "initial_ancilla", PartitionedState(ancilla.amplitudes, layout.subset(rest)))

    def _check_op(self, op: LocalOp, party: str, k: int) -> None:
        layout = self.layout
        if len(set(op.targets)) != len(op.targets) or not op.targets:
            raise LayoutError(f"Passo {k}: alvos inválidos {op.targets}")
        for target in op.targets:
            if not 0 <= target < len(layout):
                raise LayoutError(f"Passo {k}: alvo {target} fora do layout")
            if layout.parties[target] != party:
                raise LayoutError(
                    f"Passo {k}: operação de {party} age em '{layout.labels[target]}' de {layout.parties[target]}"
                )
        dim = layout.dim_of(op.targets)
        if op.matrix.shape != (dim, dim):
            raise LayoutError(f"Passo {k}: matriz {op.matrix.shape} incompatível com alvos de dimensão {dim}")

    @property
    def t(self) -> int:
        return len(self.steps) - 1

    @property
    def n(self) -> int:
        return max(self.n_a, self.n_b)

    @property
    def ancilla_indices(self) -> List[int]:
        return [i for i in range(len(self.layout)) if i not in self.input_registers]

    def messages(self):
        for x in range(2 ** self.n_a):
            for y in range(2 ** self.n_b):
                yield x, y


def _first(layout: SubsystemLayout, party: str, role: str) -> int:
    found = layout.find(party, role)
    if not found:
        raise LayoutError(f"Layout sem registrador '{role}' de {party}")
    return found[0]


@dataclass(frozen=True, eq=False)
class RunResult:
    final_states: Dict[Tuple[int, int], PartitionedState]
    eps_xy: Dict[Tuple[int, int], float]
    eps: float


class UhlmannSplit(NamedTuple):
    c: PartitionedState              # componente ideal normalizada (sobre A2B2)
    eps: float
    e: Optional[PartitionedState]    # componente de erro; None quando ε ≈ 0


# =============================================================================
# EMBUTIMENTO E PROJEÇÃO
# =============================================================================

def _embed(layout: SubsystemLayout, fixed: Dict[int, int], rest_amplitudes: np.ndarray) -> np.ndarray:
    """Amplitudes de |fixed⟩ ⊗ |resto⟩ reordenadas para a ordem do layout."""
    fixed_idx = sorted(fixed)
    rest = [i for i in range(len(layout)) if i not in fixed]
    vec = np.ones(1, dtype=complex)
    for i in fixed_idx:
        value = fixed[i]
        if not 0 <= value < layout.dims[i]:
            raise ValidationError(f"Valor {value} fora do registrador '{layout.labels[i]}'")
        e = np.zeros(layout.dims[i], dtype=complex)
        e[value] = 1.0
        vec = np.kron(vec, e)
    vec = np.kron(vec, np.ravel(rest_amplitudes))
    src = fixed_idx + rest
    view = vec.reshape([layout.dims[i] for i in src])
    return np.transpose(view, [src.index(k) for k in range(len(layout))]).reshape(-1)


def _project(state: PartitionedState, fixed: Dict[int, int]) -> np.ndarray:
    """⟨fixed| aplicado ao estado; retorna amplitudes (não normalizadas) dos demais."""
    index = [slice(None)] * len(state.layout)
    for i, value in fixed.items():
        index[i] = value
    return np.array(state.tensor_view[tuple(index)]).reshape(-1)


def _check_messages(script: ProtocolScript, x: int, y: int) -> None:
    if not 0 <= x < 2 ** script.n_a:
        raise ValidationError(f"Mensagem x={x} fora de [0, {2 ** script.n_a})", field="x")
    if not 0 <= y < 2 ** script.n_b:
        raise ValidationError(f"Mensagem y={y} fora de [0, {2 ** script.n_b})", field="y")


# =============================================================================
# EXECUÇÃO
# =============================================================================

def _apply_step(state: PartitionedState, step: LocalStep) -> PartitionedState:
    for op in step.ops:
        state = apply_operator(state, op.matrix, op.targets)
    return state


def evolve(script: ProtocolScript, state: PartitionedState) -> PartitionedState:
    """Aplica V⁽⁰⁾, U, V⁽¹⁾, …, U, V⁽ᵗ⁾ a um estado arbitrário do layout."""
    if state.layout.dims != script.layout.dims:
        raise LayoutError(f"Estado com dims {state.layout.dims}; roteiro usa {script.layout.dims}")
    gate_targets = list(script.gate_qubits)
    for k, step in enumerate(script.steps):
        state = _apply_step(state, step)
        if k < script.t:
            state = apply_operator(state, script.gate.matrix, gate_targets)
    return PartitionedState(state.amplitudes, script.layout)


def initial_state(script: ProtocolScript, x: int, y: int) -> PartitionedState:
    """|x⟩_{A1}|y⟩_{B1}|ψ⟩ na ordem do layout."""
    _check_messages(script, x, y)
    ia, ib = script.input_registers
    amps = _embed(script.layout, {ia: x, ib: y}, script.initial_ancilla.amplitudes)
    return PartitionedState(amps, script.layout)


def run(script: ProtocolScript, x: int, y: int) -> PartitionedState:
    """
    Estado final exato para o par de mensagens (x, y).

    Raises:
        ValidationError: mensagem fora do intervalo
        LayoutError: alvos incompatíveis com o layout
    """
    return evolve(script, initial_state(script, x, y))


def _message_fidelity(script: ProtocolScript, final: PartitionedState, x: int, y: int) -> float:
    oa, ob = script.output_registers
    amplitude = _project(final, {oa: y, ob: x})
    return float(np.clip(np.vdot(amplitude, amplitude).real, 0.0, 1.0))


def message_fidelity(script: ProtocolScript, workers: int = 1) -> RunResult:
    """
    Para cada (x, y): fidelidade do estado final com |y⟩ no registrador de
    saída de Alice e |x⟩ no de Bob; ε_xy = 1 − F e ε = máx ε_xy.

    Os pares (x, y) são independentes e podem rodar em paralelo.
    """
    pairs = list(script.messages())

    def _one(pair):
        x, y = pair
        final = run(script, x, y)
        return pair, final, 1.0 - _message_fidelity(script, final, x, y)

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_one, pairs))
    else:
        results = [_one(pair) for pair in pairs]

    finals = {pair: final for pair, final, _ in results}
    eps_xy = {pair: float(np.clip(eps, 0.0, 1.0)) for pair, _, eps in results}
    eps = max(eps_xy.values())
    logger.info(f"🧪 Roteiro '{script.name}': ε = {eps:.3e} em {len(pairs)} pares de mensagens")
    return RunResult(finals, eps_xy, eps)


def receiver_ensembles(script: ProtocolScript, result: Optional[RunResult] = None) -> Tuple[Ensemble, Ensemble]:
    """
    (ensemble de Alice indexado por y, ensemble de Bob indexado por x), cada
    membro promediado uniformemente sobre a mensagem desconhecida.
    """
    result = result or message_fidelity(script)
    oa, ob = script.output_registers
    n_x, n_y = 2 ** script.n_a, 2 ** script.n_b

    alice = []
    for y in range(n_y):
        marginals = [partial_trace(result.final_states[(x, y)], [oa]) for x in range(n_x)]
        alice.append(mixture([1 / n_x] * n_x, marginals))
    bob = []
    for x in range(n_x):
        marginals = [partial_trace(result.final_states[(x, y)], [ob]) for y in range(n_y)]
        bob.append(mixture([1 / n_y] * n_y, marginals))

    return Ensemble([1 / n_y] * n_y, alice), Ensemble([1 / n_x] * n_x, bob)


# =============================================================================
# DECOMPOSIÇÃO DE UHLMANN E SUPERPOSIÇÃO
# =============================================================================

def uhlmann_split(final_state: PartitionedState, x: int, y: int,
                  registers: Optional[Tuple[int, int]] = None) -> UhlmannSplit:
    """
    final = √(1−ε)|y⟩|x⟩|c⟩ + √ε|e⟩, com c obtido por projeção em
    |y⟩_{A1}|x⟩_{B1} e renormalização.

    Args:
        registers: (saída de Alice, saída de Bob); padrão são os
                   subsistemas com papel "message"

    Raises:
        ValidationError: estado sem componente ideal (ε = 1)
    """
    layout = final_state.layout
    if registers is None:
        registers = (_first(layout, ALICE, MESSAGE), _first(layout, BOB, MESSAGE))
    oa, ob = registers
    fixed = {oa: y, ob: x}
    projected = _project(final_state, fixed)
    weight = float(np.vdot(projected, projected).real)
    if weight <= IDEAL_ATOL:
        raise ValidationError(f"Estado final sem componente ideal para (x={x}, y={y})")

    rest = [i for i in range(len(layout)) if i not in fixed]
    c = PartitionedState(projected / np.sqrt(weight), layout.subset(rest))
    eps = float(np.clip(1.0 - weight, 0.0, 1.0))

    residual = final_state.amplitudes - _embed(layout, fixed, projected)
    norm = np.linalg.norm(residual)
    e = PartitionedState(residual / norm, layout) if norm ** 2 > IDEAL_ATOL else None
    return UhlmannSplit(c, eps, e)


def _split_all(script: ProtocolScript, result: RunResult) -> Dict[Tuple[int, int], Optional[UhlmannSplit]]:
    splits = {}
    for (x, y), final in result.final_states.items():
        try:
            splits[(x, y)] = uhlmann_split(final, x, y, script.output_registers)
        except ValidationError:
            logger.warning(f"⚠️ Par (x={x}, y={y}) sem componente ideal")
            splits[(x, y)] = None
    return splits


def _superposition_layout(script: ProtocolScript) -> SubsystemLayout:
    front = make_layout([("A_msg_copy", 2 ** script.n_a, ALICE, COPY_REGISTER)])
    back = make_layout([("B_msg_copy", 2 ** script.n_b, BOB, COPY_REGISTER)])
    return front.concat(script.layout).concat(back)


def _assemble(script: ProtocolScript, vectors: Dict[Tuple[int, int], np.ndarray]) -> PartitionedState:
    n_x, n_y = 2 ** script.n_a, 2 ** script.n_b
    amps = np.zeros((n_x, script.layout.size, n_y), dtype=complex)
    for (x, y), vec in vectors.items():
        amps[x, :, y] = vec
    amps /= np.sqrt(n_x * n_y)
    return PartitionedState(amps.reshape(-1), _superposition_layout(script))


def superposition_state(script: ProtocolScript, result: Optional[RunResult] = None) -> PartitionedState:
    """
    |η_ε⟩ = 2^{−(n_a+n_b)/2} Σ_xy |x⟩_{A3} |η_xy⟩ |y⟩_{B3}, com as cópias das
    mensagens à frente (Alice) e ao final (Bob) do layout.
    """
    result = result or message_fidelity(script)
    return _assemble(script, {pair: s.amplitudes for pair, s in result.final_states.items()})


def ideal_superposition_state(script: ProtocolScript, result: Optional[RunResult] = None) -> PartitionedState:
    """|η⟩ montado com os componentes ideais |y⟩|x⟩|c_xy⟩ da decomposição de Uhlmann."""
    result = result or message_fidelity(script)
    oa, ob = script.output_registers
    vectors = {}
    for (x, y), split in _split_all(script, result).items():
        if split is None:
            raise ValidationError(f"|η⟩ indefinido: par (x={x}, y={y}) sem componente ideal")
        vectors[(x, y)] = _embed(script.layout, {oa: y, ob: x}, split.c.amplitudes)
    return _assemble(script, vectors)


def superposition_overlap(script: ProtocolScript, result: Optional[RunResult] = None) -> float:
    """|⟨η|η_ε⟩|², que é ≥ 1 − ε."""
    result = result or message_fidelity(script)
    ideal = ideal_superposition_state(script, result)
    actual = superposition_state(script, result)
    return float(abs(np.vdot(ideal.amplitudes, actual.amplitudes)) ** 2)


def eta_entanglement(script: ProtocolScript, direct: bool = False,
                     result: Optional[RunResult] = None) -> float:
    """
    Forma fechada n_a + n_b + 2^{−(n_a+n_b)} Σ E(c_xy) para |η⟩.

    Com direct=True retorna a entropia de emaranhamento de |η_ε⟩ calculada
    diretamente; em ε = 0 os dois valores coincidem.
    """
    result = result or message_fidelity(script)
    if direct:
        return entanglement_entropy(superposition_state(script, result))
    splits = _split_all(script, result)
    if any(split is None for split in splits.values()):
        raise ValidationError("Forma fechada indefinida: há pares sem componente ideal")
    average = np.mean([entanglement_entropy(split.c) for split in splits.values()])
    return float(script.n_a + script.n_b + average)


def superposition_gain(script: ProtocolScript, result: Optional[RunResult] = None) -> float:
    """ΔE = E(|η_ε⟩) − E(|ψ⟩_{A2B2})."""
    result = result or message_fidelity(script)
    return float(eta_entanglement(script, direct=True, result=result) - entanglement_entropy(script.initial_ancilla))


# =============================================================================
# TRANSFORMAÇÕES DE ROTEIRO
# =============================================================================

def canonicalize_script(script: ProtocolScript) -> ProtocolScript:
    """
    Reescreve o roteiro sobre U_d: U = fase·(A⊗B)·U_d·(A'⊗B'), com A', B'
    anexados ao fim do passo k e fase·A, B ao início do passo k+1.
    """
    form = decompose(script.gate)
    phase = form.phase / abs(form.phase)
    ga, gb = script.gate_qubits
    pre_a, pre_b = form.pre_local
    post_a, post_b = form.post_local

    steps = list(script.steps)
    new_steps = []
    for k, step in enumerate(steps):
        alice, bob = list(step.alice), list(step.bob)
        if k > 0:
            alice.insert(0, LocalOp(phase * post_a, (ga,)))
            bob.insert(0, LocalOp(post_b, (gb,)))
        if k < script.t:
            alice.append(LocalOp(pre_a, (ga,)))
            bob.append(LocalOp(pre_b, (gb,)))
        new_steps.append(LocalStep(tuple(alice), tuple(bob)))

    logger.debug(f"📐 Roteiro '{script.name}' reescrito sobre U_d{form.alphas}")
    return ProtocolScript(
        gate=form.canonical_gate(),
        layout=script.layout,
        n_a=script.n_a,
        n_b=script.n_b,
        steps=tuple(new_steps),
        initial_ancilla=script.initial_ancilla,
        input_registers=script.input_registers,
        output_registers=script.output_registers,
        name=f"{script.name}/canonico",
    )


def inverse_script(script: ProtocolScript) -> ProtocolScript:
    """Roteiro cuja evolução é a inversa exata: V⁽⁰⁾†, U†, …, U†, V⁽ᵗ⁾†."""
    steps = tuple(
        LocalStep(_reversed_ops(step.alice, "dagger"), _reversed_ops(step.bob, "dagger"))
        for step in reversed(script.steps)
    )
    return ProtocolScript(
        gate=script.gate.dagger,
        layout=script.layout,
        n_a=script.n_a,
        n_b=script.n_b,
        steps=steps,
        initial_ancilla=script.initial_ancilla,
        input_registers=script.input_registers,
        output_registers=script.output_registers,
        name=f"{script.name}/inverso",
    )


def copy_unitary(dim: int) -> np.ndarray:
    """|a⟩|b⟩ → |a⟩|(a + b) mod dim⟩ em dois registradores de dimensão `dim`."""
    matrix = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            matrix[a * dim + (a + b) % dim, a * dim + b] = 1.0
    return matrix


def _local_conjugators(amplitudes: np.ndarray, layout: SubsystemLayout,
                       alice: List[int], bob: List[int]) -> Tuple[np.ndarray, np.ndarray]:
    """
    (K_A, K_B) com (K_A⊗K_B)|c⟩ = |c*⟩, a partir do SVD completo de c
    organizado como matriz Alice × Bob.
    """
    order = alice + bob
    m = np.transpose(amplitudes.reshape(layout.dims), order).reshape(layout.dim_of(alice), -1)
    u, _, vh = scipy.linalg.svd(m, full_matrices=True)
    return u.conj() @ u.conj().T, vh.conj().T @ vh.conj()


def reverse_protocol(script: ProtocolScript) -> ProtocolScript:
    """
    Deriva o roteiro sem emaranhamento prévio com 2t aplicações de U_d.

    Layout: [A3, A4] + layout original + [B3, B4]. Sequência:
    copia x (A1→A3) e y (B1→B3); roda o roteiro; copia y (A1→A4) e x
    (B1→B4); conjuga |c_xy⟩ localmente, condicionado a (x, y); aplica a
    sequência transposta V⁽ᵗ⁾ᵀ, U_d, …, U_d, V⁽⁰⁾ᵀ; por fim leva |ψ*⟩ a |ψ⟩.

    Raises:
        ValidationError: porta fora da forma U_d (use canonicalize_script)
    """
    if not is_canonical_form(script.gate):
        raise ValidationError(
            "reverse_protocol exige porta na forma U_d (use canonicalize_script antes)", field="gate"
        )
    if script.output_registers != script.input_registers:
        raise LayoutError("reverse_protocol exige saída nos próprios registradores de entrada")

    base = script.layout
    dim = 2 ** script.n
    copies = make_layout([("A3", dim, ALICE, COPY_REGISTER), ("A4", dim, ALICE, COPY_REGISTER)])
    outs = make_layout([("B3", dim, BOB, COPY_REGISTER), ("B4", dim, BOB, COPY_REGISTER)])
    layout = copies.concat(base).concat(outs)
    a3, a4 = 0, 1
    b3, b4 = len(layout) - 2, len(layout) - 1
    ia, ib = (i + 2 for i in script.input_registers)

    # subsistemas A2 / B2 no layout novo (exceto registradores)
    a2 = [i + 2 for i in base.indices(ALICE) if i != script.input_registers[0]]
    b2 = [i + 2 for i in base.indices(BOB) if i != script.input_registers[1]]

    result = message_fidelity(script)
    splits = _split_all(script, result)
    c_layout = base.subset(script.ancilla_indices)
    c_alice = [k for k, i in enumerate(script.ancilla_indices) if base.parties[i] == ALICE]
    c_bob = [k for k, i in enumerate(script.ancilla_indices) if base.parties[i] == BOB]
    d_a2, d_b2 = base.dim_of([i - 2 for i in a2]), base.dim_of([i - 2 for i in b2])

    blocks_a, blocks_b = {}, {}
    for (x, y), split in splits.items():
        if split is None:
            continue
        k_a, k_b = _local_conjugators(split.c.amplitudes, c_layout, c_alice, c_bob)
        blocks_a[(y, x)] = k_a   # controles de Alice: (A1 = y, A3 = x)
        blocks_b[(x, y)] = k_b   # controles de Bob: (B1 = x, B3 = y)

    eye_a, eye_b = np.eye(d_a2), np.eye(d_b2)
    cond_a = scipy.linalg.block_diag(*[blocks_a.get((i, j), eye_a) for i in range(dim) for j in range(dim)])
    cond_b = scipy.linalg.block_diag(*[blocks_b.get((i, j), eye_b) for i in range(dim) for j in range(dim)])

    psi_a, psi_b = _local_conjugators(
        script.initial_ancilla.amplitudes, c_layout, c_alice, c_bob
    )
    # K_ψ leva |ψ*⟩ a |ψ⟩: conjugado dos operadores de |ψ⟩ → |ψ*⟩
    psi_a, psi_b = psi_a.conj(), psi_b.conj()

    copy = copy_unitary(dim)
    forward = [
        (list(op.shifted(2) for op in step.alice), list(op.shifted(2) for op in step.bob))
        for step in script.steps
    ]
    backward = [
        (list(_reversed_ops(a, "transpose")), list(_reversed_ops(b, "transpose")))
        for a, b in reversed(forward)
    ]

    forward[0][0].insert(0, LocalOp(copy, (ia, a3)))
    forward[0][1].insert(0, LocalOp(copy, (ib, b3)))

    backward[-1][0].append(LocalOp(psi_a, tuple(a2)))
    backward[-1][1].append(LocalOp(psi_b, tuple(b2)))

    middle_a = forward[-1][0] + [LocalOp(copy, (ia, a4)), LocalOp(cond_a, (ia, a3, *a2))] + backward[0][0]
    middle_b = forward[-1][1] + [LocalOp(copy, (ib, b4)), LocalOp(cond_b, (ib, b3, *b2))] + backward[0][1]
    sequence = forward[:-1] + [(middle_a, middle_b)] + backward[1:]
    steps = tuple(LocalStep(tuple(a), tuple(b)) for a, b in sequence)

    zero = np.zeros(dim * dim, dtype=complex)
    zero[0] = 1.0
    ancilla = np.kron(np.kron(zero, script.initial_ancilla.amplitudes), zero)
    rest = [i for i in range(len(layout)) if i not in (ia, ib)]

    reversed_script = ProtocolScript(
        gate=script.gate,
        layout=layout,
        n_a=script.n_a,
        n_b=script.n_b,
        steps=steps,
        initial_ancilla=PartitionedState(ancilla, layout.subset(rest)),
        input_registers=(ia, ib),
        output_registers=(a4, b4),
        name=f"{script.name}/reverso",
    )
    logger.info(
        f"🔁 Roteiro reverso de '{script.name}': {reversed_script.t} aplicações, "
        f"{len(steps)} passos locais"
    )
    return reversed_script


def reversed_round_fidelity(script: ProtocolScript, x: int, y: int,
                            reversed_script: Optional[ProtocolScript] = None) -> float:
    """
    |⟨ζ|ζ₁⟩|² para uma rodada: estado ideal com x em A1/A3/B4, y em
    A4/B1/B3 e a ancila restaurada em |ψ⟩.
    """
    rev = reversed_script or reverse_protocol(script)
    final = run(rev, x, y)
    ia, ib = rev.input_registers
    a3, a4 = rev.layout.find(ALICE, COPY_REGISTER)
    b3, b4 = rev.layout.find(BOB, COPY_REGISTER)
    ideal = _embed(rev.layout, {ia: x, a3: x, a4: y, ib: y, b3: y, b4: x}, script.initial_ancilla.amplitudes)
    return float(abs(np.vdot(ideal, final.amplitudes)) ** 2)


# =============================================================================
# TAXAS
# =============================================================================

def rate_pair_achieved(script: ProtocolScript, eps_target: float,
                       result: Optional[RunResult] = None) -> Optional[Tuple[float, float]]:
    """(n_a/t, n_b/t) quando a fidelidade atinge 1 − ε_alvo; caso contrário None."""
    if script.t < 1:
        raise ValidationError("Taxas exigem ao menos uma aplicação da porta", field="t")
    result = result or message_fidelity(script)
    if result.eps > eps_target:
        logger.info(f"Roteiro '{script.name}': ε = {result.eps:.3e} > {eps_target:.3e}, nenhuma taxa certificada")
        return None
    return script.n_a / script.t, script.n_b / script.t


def classify_rate_set(script: ProtocolScript) -> str:
    """"S_U" para ancila inicial sem emaranhamento; "S_U^E" caso contrário."""
    return S_U if entanglement_entropy(script.initial_ancilla) <= UNENTANGLED_ATOL else S_U_E
