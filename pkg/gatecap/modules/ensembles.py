"""
Módulo de Ensembles e Informação de Holevo
==========================================

Informação de Holevo, ensembles de codificação por Paulis (uni e
bidirecional), limites χ_up / χ_lo, variações Δχ e a construção de
ensembles produto a partir dos marginais.

Ensembles guardam membros puros sempre que possível; a conversão para
operador densidade é feita apenas quando necessária (marginais, médias).

Convenção de direção:
---------------------
- "->" : Alice → Bob (o receptor é Bob; usam-se os marginais de Bob)
- "<-" : Bob → Alice (o receptor é Alice)

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from gatecap.modules.canonical import Gate, decompose
from gatecap.modules.capacity import (
    CapacityReport, CapacitySearchConfig, disentangling_capability,
)
from gatecap.modules.error_handler import BoundsGapError, LayoutError, ValidationError
from gatecap.modules.qmath import (
    ALICE, BOB, GATE_QUBIT, PAULIS,
    DensityOperator, PartitionedState, QuantumObject, SubsystemLayout,
    apply_operator, as_density, basis_state, make_layout, partial_trace,
    permute, tensor, von_neumann_entropy,
)

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

FORWARD = "->"
BACKWARD = "<-"
DIRECTIONS = (FORWARD, BACKWARD)

PROB_ATOL = 1e-12
BOUNDS_ATOL = 1e-10


# =============================================================================
# TIPOS
# =============================================================================

def _check_probs(probs: Sequence[float], nome: str) -> Tuple[float, ...]:
    probs = tuple(float(p) for p in probs)
    if not probs:
        raise ValidationError(f"{nome}: lista de probabilidades vazia", field=nome)
    if any(p < 0 for p in probs):
        raise ValidationError(f"{nome}: probabilidades negativas", field=nome)
    if abs(sum(probs) - 1.0) > PROB_ATOL:
        raise ValidationError(f"{nome}: probabilidades somam {sum(probs):.15f}", field=nome)
    return probs


@dataclass(frozen=True, eq=False)
class Ensemble:
    """{p_i, ρ_i}; membros puros ou operadores densidade sobre um mesmo layout."""
    probs: Tuple[float, ...]
    members: Tuple[QuantumObject, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_probs(self.probs, "probs"))
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) != len(self.probs):
            raise ValidationError("Número de membros difere do número de probabilidades")
        dims = {m.layout.dims for m in self.members}
        if len(dims) != 1:
            raise LayoutError("Membros do ensemble devem compartilhar o layout")

    @property
    def layout(self) -> SubsystemLayout:
        return self.members[0].layout

    def densities(self) -> List[DensityOperator]:
        return [as_density(m) for m in self.members]

    def average(self) -> DensityOperator:
        return mixture(self.probs, self.members)


@dataclass(frozen=True, eq=False)
class BidirEnsemble:
    """{p_i, q_j, ψ_ij}: i é a mensagem de Alice, j a de Bob."""
    probs_A: Tuple[float, ...]
    probs_B: Tuple[float, ...]
    members: Tuple[Tuple[QuantumObject, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "probs_A", _check_probs(self.probs_A, "probs_A"))
        object.__setattr__(self, "probs_B", _check_probs(self.probs_B, "probs_B"))
        grid = tuple(tuple(row) for row in self.members)
        object.__setattr__(self, "members", grid)
        if len(grid) != len(self.probs_A) or any(len(row) != len(self.probs_B) for row in grid):
            raise ValidationError("Grade de membros incompatível com (p_i, q_j)")
        dims = {m.layout.dims for row in grid for m in row}
        if len(dims) != 1:
            raise LayoutError("Membros do ensemble devem compartilhar o layout")

    @property
    def layout(self) -> SubsystemLayout:
        return self.members[0][0].layout


@dataclass(frozen=True)
class CorrectionMaps:
    """
    Correções unitárias locais: alice[i] = (matriz, alvo) aplicada por Alice
    quando conhece i; bob[j] idem para Bob. Alvos são índices do layout completo.
    """
    alice: Tuple[Tuple[np.ndarray, int], ...]
    bob: Tuple[Tuple[np.ndarray, int], ...]

    def __post_init__(self):
        for nome, maps in (("alice", self.alice), ("bob", self.bob)):
            for matrix, _ in maps:
                matrix = np.asarray(matrix)
                if not np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), atol=1e-10):
                    raise ValidationError(f"Mapa de correção de {nome} não unitário", field=nome)


def mixture(probs: Sequence[float], members: Sequence[QuantumObject]) -> DensityOperator:
    matrix = sum(p * as_density(m).matrix for p, m in zip(probs, members))
    return DensityOperator(matrix, members[0].layout, validate=False)


# =============================================================================
# INFORMAÇÃO DE HOLEVO
# =============================================================================

def holevo_chi(ensemble: Ensemble) -> float:
    """
    χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i), em bits.

    Examples:
        {½|0⟩, ½|1⟩} → 1;  {½|0⟩, ½|+⟩} → 0.6009
    """
    average = von_neumann_entropy(ensemble.average())
    members = sum(
        p * (0.0 if isinstance(m, PartitionedState) else von_neumann_entropy(m))
        for p, m in zip(ensemble.probs, ensemble.members)
    )
    return float(max(0.0, average - members))


# =============================================================================
# ENSEMBLE UNIDIRECIONAL
# =============================================================================

def _pauli_pair(k: int) -> np.ndarray:
    return np.kron(PAULIS[k], PAULIS[k])


def build_unidirectional_ensemble(psi: PartitionedState) -> Ensemble:
    """Quatro membros equiprováveis σ_i⊗σ_i|ψ⟩ nos gate-qubits."""
    targets = list(psi.layout.gate_qubits())
    members = tuple(apply_operator(psi, _pauli_pair(k), targets) for k in range(4))
    return Ensemble((0.25,) * 4, members)


def depolarization_residual(psi: PartitionedState) -> float:
    """
    Norma de Frobenius de Σ¼·Tr_A(V_i ψ) − ½𝟙⊗ρ_resto, onde o 𝟙 ocupa o
    gate-qubit de Bob e ρ_resto é o marginal dos demais subsistemas de Bob.
    """
    layout = psi.layout
    _, gate_b = layout.gate_qubits()
    bob = layout.indices(BOB)
    ensemble = build_unidirectional_ensemble(psi)
    marginal = mixture(ensemble.probs, [partial_trace(m, bob) for m in ensemble.members])

    rest = [i for i in bob if i != gate_b]
    half = DensityOperator(np.eye(2) / 2, layout.subset([gate_b]))
    if rest:
        expected = tensor(half, partial_trace(psi, rest))
        order = [gate_b] + rest
        # reordena para a ordem do layout
        expected = permute(expected, [order.index(i) for i in bob])
    else:
        expected = half
    return float(np.linalg.norm(marginal.matrix - expected.matrix))


def _receiver(layout: SubsystemLayout, direction: str) -> List[int]:
    if direction == FORWARD:
        return layout.indices(BOB)
    if direction == BACKWARD:
        return layout.indices(ALICE)
    raise ValidationError(f"Direção inválida: {direction} (use '->' ou '<-')", field="direction")


def apply_gate(gate: Gate, ensemble: Union[Ensemble, BidirEnsemble]):
    """Aplica a porta aos gate-qubits de todos os membros."""
    targets = list(ensemble.layout.gate_qubits())
    if isinstance(ensemble, Ensemble):
        return Ensemble(ensemble.probs, tuple(apply_operator(m, gate.matrix, targets) for m in ensemble.members))
    return BidirEnsemble(
        ensemble.probs_A, ensemble.probs_B,
        tuple(tuple(apply_operator(m, gate.matrix, targets) for m in row) for row in ensemble.members),
    )


def receiver_chi(ensemble: Ensemble, direction: str = FORWARD) -> float:
    """χ dos marginais do receptor."""
    keep = _receiver(ensemble.layout, direction)
    marginals = Ensemble(ensemble.probs, tuple(partial_trace(m, keep) for m in ensemble.members))
    return holevo_chi(marginals)


def delta_chi_oneway(gate: Gate, ensemble: Ensemble, direction: str = FORWARD) -> float:
    """χ(Tr U·E) − χ(Tr E) nos marginais do receptor."""
    before = receiver_chi(ensemble, direction)
    after = receiver_chi(apply_gate(gate, ensemble), direction)
    return float(after - before)


# =============================================================================
# ENSEMBLE BIDIRECIONAL
# =============================================================================

def build_bidirectional_ensemble(psi: PartitionedState) -> BidirEnsemble:
    """
    Membros ψ_ij = (σ_i⊗σ_i)(σ_j⊗σ_j)|ψ⟩ nos gate-qubits, p_i = q_j = ¼.

    Raises:
        ValidationError: operadores de Alice e Bob não comutam
    """
    targets = list(psi.layout.gate_qubits())
    for i in range(4):
        for j in range(4):
            a, b = _pauli_pair(i), _pauli_pair(j)
            if not np.allclose(a @ b, b @ a, atol=1e-12):
                raise ValidationError("Operadores de codificação não comutam")
    grid = tuple(
        tuple(apply_operator(psi, _pauli_pair(i) @ _pauli_pair(j), targets) for j in range(4))
        for i in range(4)
    )
    return BidirEnsemble((0.25,) * 4, (0.25,) * 4, grid)


def chi_up(e: BidirEnsemble, direction: str = FORWARD) -> float:
    """
    "->": Σ_j q_j χ({p_i, ρ^B_ij});  "<-": Σ_i p_i χ({q_j, ρ^A_ij}).
    """
    keep = _receiver(e.layout, direction)
    total = 0.0
    if direction == FORWARD:
        for j, q in enumerate(e.probs_B):
            block = Ensemble(e.probs_A, tuple(partial_trace(e.members[i][j], keep) for i in range(len(e.probs_A))))
            total += q * holevo_chi(block)
    else:
        for i, p in enumerate(e.probs_A):
            block = Ensemble(e.probs_B, tuple(partial_trace(e.members[i][j], keep) for j in range(len(e.probs_B))))
            total += p * holevo_chi(block)
    return float(total)


def _local_target(keep: List[int], target: int) -> int:
    if target not in keep:
        raise LayoutError(f"Alvo {target} da correção não pertence ao receptor")
    return keep.index(target)


def chi_lo(e: BidirEnsemble, maps: CorrectionMaps, direction: str = FORWARD) -> float:
    """
    "->": χ({p_i, Σ_j q_j T_j^B(ρ^B_ij)});  "<-" espelhado com T_i^A.

    Apenas os mapas fornecidos são avaliados (nenhuma otimização sobre mapas).
    """
    keep = _receiver(e.layout, direction)
    n_a, n_b = len(e.probs_A), len(e.probs_B)
    members = []
    if direction == FORWARD:
        if len(maps.bob) != n_b:
            raise ValidationError("Número de correções de Bob difere de q_j", field="maps")
        for i in range(n_a):
            corrected = []
            for j in range(n_b):
                matrix, target = maps.bob[j]
                rho = partial_trace(e.members[i][j], keep)
                corrected.append(apply_operator(rho, matrix, [_local_target(keep, target)]))
            members.append(mixture(e.probs_B, corrected))
        return holevo_chi(Ensemble(e.probs_A, tuple(members)))

    if len(maps.alice) != n_a:
        raise ValidationError("Número de correções de Alice difere de p_i", field="maps")
    for j in range(n_b):
        corrected = []
        for i in range(n_a):
            matrix, target = maps.alice[i]
            rho = partial_trace(e.members[i][j], keep)
            corrected.append(apply_operator(rho, matrix, [_local_target(keep, target)]))
        members.append(mixture(e.probs_A, corrected))
    return holevo_chi(Ensemble(e.probs_B, tuple(members)))


def chi_interval(e: BidirEnsemble, maps: CorrectionMaps, direction: str = FORWARD) -> Tuple[float, float]:
    """(χ_lo, χ_up): o valor operacional só é fixado quando coincidem."""
    return chi_lo(e, maps, direction), chi_up(e, direction)


def pauli_correction_maps(layout: SubsystemLayout) -> CorrectionMaps:
    """σ_i no gate-qubit de Alice, σ_j no gate-qubit de Bob."""
    gate_a, gate_b = layout.gate_qubits()
    return CorrectionMaps(
        alice=tuple((PAULIS[k], gate_a) for k in range(4)),
        bob=tuple((PAULIS[k], gate_b) for k in range(4)),
    )


def identity_correction_maps(layout: SubsystemLayout, n_a: int = 4, n_b: int = 4) -> CorrectionMaps:
    gate_a, gate_b = layout.gate_qubits()
    eye = np.eye(2, dtype=complex)
    return CorrectionMaps(
        alice=tuple((eye, gate_a) for _ in range(n_a)),
        bob=tuple((eye, gate_b) for _ in range(n_b)),
    )


def _bidir_total(e: BidirEnsemble, maps: CorrectionMaps, strict: bool, rotulo: str) -> float:
    total = 0.0
    for direction in DIRECTIONS:
        lo, up = chi_interval(e, maps, direction)
        if abs(up - lo) > BOUNDS_ATOL:
            mensagem = (
                f"χ_lo ≠ χ_up no ensemble {rotulo} ({direction}): "
                f"lo={lo:.12f}, up={up:.12f}"
            )
            if strict:
                raise BoundsGapError(mensagem, details={"lo": lo, "up": up, "direction": direction})
            logger.warning(f"⚠️ {mensagem}; usando o limite superior")
        total += up
    return total


def delta_chi_bidir(gate: Gate, e: BidirEnsemble, maps: Optional[CorrectionMaps] = None,
                    strict: bool = True) -> float:
    """
    [χ→ + χ←](U·E) − [χ→ + χ←](E), válido quando χ_lo = χ_up.

    Raises:
        BoundsGapError: limites não coincidem (com strict=True)
    """
    maps = maps or pauli_correction_maps(e.layout)
    before = _bidir_total(e, maps, strict, "de entrada")
    after = _bidir_total(apply_gate(gate, e), maps, strict, "de saída")
    return float(after - before)


# =============================================================================
# CONSTRUÇÃO PRODUTO
# =============================================================================

def product_marginal_ensembles(phi: PartitionedState) -> Tuple[Ensemble, Ensemble]:
    """
    ({¼, σ_i Tr_B(φ) σ_i} em Alice, {¼, σ_j Tr_A(φ) σ_j} em Bob), com σ no
    gate-qubit de cada parte.
    """
    layout = phi.layout
    gate_a, gate_b = layout.gate_qubits()
    alice, bob = layout.indices(ALICE), layout.indices(BOB)
    rho_a, rho_b = partial_trace(phi, alice), partial_trace(phi, bob)
    local_a, local_b = alice.index(gate_a), bob.index(gate_b)
    ens_a = Ensemble((0.25,) * 4, tuple(apply_operator(rho_a, PAULIS[k], [local_a]) for k in range(4)))
    ens_b = Ensemble((0.25,) * 4, tuple(apply_operator(rho_b, PAULIS[k], [local_b]) for k in range(4)))
    return ens_a, ens_b


def appendix_b_ensemble(phi: PartitionedState) -> BidirEnsemble:
    """
    Membros produto σ_iσ_j Tr_B(φ) σ_jσ_i ⊗ σ_iσ_j Tr_A(φ) σ_jσ_i, com os mesmos
    marginais de um lado que build_bidirectional_ensemble(φ).
    """
    layout = phi.layout
    gate_a, gate_b = layout.gate_qubits()
    alice, bob = layout.indices(ALICE), layout.indices(BOB)
    rho_a, rho_b = partial_trace(phi, alice), partial_trace(phi, bob)
    local_a, local_b = alice.index(gate_a), bob.index(gate_b)
    back = list(np.argsort(alice + bob))

    grid = []
    for i in range(4):
        row = []
        for j in range(4):
            op = PAULIS[i] @ PAULIS[j]
            member = tensor(apply_operator(rho_a, op, [local_a]), apply_operator(rho_b, op, [local_b]))
            row.append(permute(member, back))
        grid.append(tuple(row))
    return BidirEnsemble((0.25,) * 4, (0.25,) * 4, tuple(grid))


def marginal_mismatch(a: BidirEnsemble, b: BidirEnsemble) -> float:
    """Maior diferença entrada a entrada entre marginais de Alice e de Bob."""
    layout = a.layout
    worst = 0.0
    for party in (ALICE, BOB):
        keep = layout.indices(party)
        for i in range(len(a.probs_A)):
            for j in range(len(a.probs_B)):
                diff = partial_trace(a.members[i][j], keep).matrix - partial_trace(b.members[i][j], keep).matrix
                worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def counterexample_ensemble() -> BidirEnsemble:
    """
    ψ00 = ψ01 = ψ10 = |00⟩, ψ11 = |11⟩, p = q = ½ sobre (qubit A, qubit B).
    χ_up em cada direção vale ½; total 1 bit.
    """
    layout = make_layout([("A_U", 2, ALICE, GATE_QUBIT), ("B_U", 2, BOB, GATE_QUBIT)])
    zero = basis_state(layout, [0, 0])
    one = basis_state(layout, [1, 1])
    return BidirEnsemble((0.5, 0.5), (0.5, 0.5), ((zero, zero), (zero, one)))


# =============================================================================
# CADEIAS COMPLETAS
# =============================================================================

@dataclass(frozen=True, eq=False)
class ChainResult:
    """Resultado de decompose → busca de desemaranhamento em U_d → ensemble → Δχ."""
    canonical_gate: Gate
    search: CapacityReport
    delta_chi: float
    lo_up: Tuple[Tuple[float, float], ...]
    residual: float


def oneway_chain(gate: Gate, config: Optional[CapacitySearchConfig] = None,
                 direction: str = FORWARD) -> ChainResult:
    """Δχ→ para o ensemble unidirecional construído do melhor estado de desemaranhamento."""
    ud = decompose(gate).canonical_gate()
    search = disentangling_capability(ud, config)
    ensemble = build_unidirectional_ensemble(search.best_state)
    delta = delta_chi_oneway(ud, ensemble, direction)
    residual = depolarization_residual(search.best_state)
    return ChainResult(ud, search, delta, (), residual)


def bidir_chain(gate: Gate, config: Optional[CapacitySearchConfig] = None,
                strict: bool = True) -> ChainResult:
    """Δχ↔ para o ensemble bidirecional construído do melhor estado de desemaranhamento."""
    ud = decompose(gate).canonical_gate()
    search = disentangling_capability(ud, config)
    ensemble = build_bidirectional_ensemble(search.best_state)
    maps = pauli_correction_maps(ensemble.layout)
    delta = delta_chi_bidir(ud, ensemble, maps, strict=strict)
    output = apply_gate(ud, ensemble)
    lo_up = tuple(chi_interval(e, maps, d) for e in (ensemble, output) for d in DIRECTIONS)
    residual = max(abs(up - lo) for lo, up in lo_up)
    return ChainResult(ud, search, delta, lo_up, residual)
