"""
Módulo de Álgebra Linear Quântica
=================================

Núcleo numérico consumido por todos os outros módulos: layouts de
subsistemas, estados puros particionados, operadores densidade e os
kernels de entropia, fidelidade e distância.

Convenção de ordenação:
-----------------------
O subsistema 0 do layout é o índice MAIS significativo do vetor de
amplitudes (ordem de Kronecker). Assim:

| Estado        | Layout (dims) | Vetor          |
|---------------|---------------|----------------|
| |0⟩ ⊗ |1⟩     | (2, 2)        | (0, 1, 0, 0)   |
| |1⟩ ⊗ |0⟩     | (2, 2)        | (0, 0, 1, 0)   |
| |+⟩ ⊗ |0⟩     | (2, 2)        | (1, 0, 1, 0)/√2|

Toda aritmética de índices passa por `reshape(dims)`; nenhuma operação
reordena subsistemas implicitamente (use `permute`).

Todas as entropias são em base 2 (bits / ebits).

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from gatecap.modules.error_handler import LayoutError, ValidationError

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

ALICE = "Alice"
BOB = "Bob"
PARTIES = (ALICE, BOB)

MESSAGE = "message"
GATE_QUBIT = "gate-qubit"
ANCILLA = "ancilla"
COPY_REGISTER = "copy-register"
ROLES = (MESSAGE, GATE_QUBIT, ANCILLA, COPY_REGISTER)

NORM_ATOL = 1e-10
HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGEN_FLOOR = -1e-10
ENTROPY_CLAMP = 1e-12
SCHMIDT_CUTOFF = 1e-14

# Matrizes de Pauli σ0..σ3 (I, X, Y, Z)
PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


# =============================================================================
# TIPOS
# =============================================================================

@dataclass(frozen=True)
class SubsystemLayout:
    """
    Lista ordenada de subsistemas com dimensão, parte (Alice/Bob) e papel.

    Rótulos são opcionais; quando omitidos viram "s0", "s1", ...
    """
    dims: Tuple[int, ...]
    parties: Tuple[str, ...]
    roles: Tuple[str, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "parties", tuple(self.parties))
        object.__setattr__(self, "roles", tuple(self.roles))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"s{i}" for i in range(len(dims))))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

        n = len(dims)
        if not (len(self.parties) == len(self.roles) == len(self.labels) == n):
            raise LayoutError("dims, parties, roles e labels devem ter o mesmo tamanho")
        if any(d < 1 for d in dims):
            raise LayoutError(f"Dimensões devem ser positivas: {dims}")
        for party in self.parties:
            if party not in PARTIES:
                raise LayoutError(f"Parte desconhecida: {party}")
        for role in self.roles:
            if role not in ROLES:
                raise LayoutError(f"Papel desconhecido: {role}")
        if len(set(self.labels)) != n:
            raise LayoutError(f"Rótulos repetidos no layout: {self.labels}")

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def indices(self, party: str) -> List[int]:
        return [i for i, p in enumerate(self.parties) if p == party]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"Subsistema '{label}' não existe no layout") from None

    def find(self, party: str, role: str) -> List[int]:
        return [i for i in range(len(self)) if self.parties[i] == party and self.roles[i] == role]

    def gate_qubits(self) -> Tuple[int, int]:
        """Retorna (índice Alice, índice Bob) dos qubits da porta; exige exatamente um de cada."""
        alice = self.find(ALICE, GATE_QUBIT)
        bob = self.find(BOB, GATE_QUBIT)
        if len(alice) != 1 or len(bob) != 1:
            raise LayoutError("Layout deve ter exatamente um gate-qubit de Alice e um de Bob")
        if self.dims[alice[0]] != 2 or self.dims[bob[0]] != 2:
            raise LayoutError("Gate-qubits devem ter dimensão 2")
        return alice[0], bob[0]

    def subset(self, keep: Sequence[int]) -> "SubsystemLayout":
        return SubsystemLayout(
            tuple(self.dims[i] for i in keep),
            tuple(self.parties[i] for i in keep),
            tuple(self.roles[i] for i in keep),
            tuple(self.labels[i] for i in keep),
        )

    @property
    def default_labels(self) -> bool:
        return self.labels == tuple(f"s{i}" for i in range(len(self)))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        """
        Justapõe dois layouts. Se houver colisão e o segundo usar rótulos padrão,
        eles são renumerados pela posição no resultado; rótulos explícitos
        repetidos geram LayoutError.
        """
        left, right = self.labels, other.labels
        if set(left) & set(right) and other.default_labels:
            right = tuple(f"s{len(self) + i}" for i in range(len(other)))
        return SubsystemLayout(
            self.dims + other.dims,
            self.parties + other.parties,
            self.roles + other.roles,
            left + right,
        )

    def dim_of(self, indices: Iterable[int]) -> int:
        return int(np.prod([self.dims[i] for i in indices], dtype=np.int64))


def make_layout(entradas: Sequence[Tuple[str, int, str, str]]) -> SubsystemLayout:
    """Cria um layout a partir de tuplas (rótulo, dim, parte, papel)."""
    labels, dims, parties, roles = zip(*entradas) if entradas else ((), (), (), ())
    return SubsystemLayout(tuple(dims), tuple(parties), tuple(roles), tuple(labels))


@dataclass(frozen=True, eq=False)
class PartitionedState:
    """Vetor de amplitudes normalizado sobre um SubsystemLayout."""
    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", amps)
        if amps.size != self.layout.size:
            raise LayoutError(
                f"Tamanho do vetor ({amps.size}) difere do produto das dimensões ({self.layout.size})"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValidationError(f"Estado não normalizado (norma {norm:.15f})", field="amplitudes")

    @property
    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Matriz densidade hermitiana, traço 1, semidefinida positiva."""
    matrix: np.ndarray
    layout: SubsystemLayout
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        rho = _frozen(self.matrix)
        object.__setattr__(self, "matrix", rho)
        n = self.layout.size
        if rho.shape != (n, n):
            raise LayoutError(f"Matriz {rho.shape} incompatível com o layout (dim {n})")
        if not self.validate:
            return
        if not np.allclose(rho, rho.conj().T, atol=HERMITIAN_ATOL, rtol=0):
            raise ValidationError("Operador densidade não hermitiano", field="matrix")
        trace = np.trace(rho)
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValidationError(f"Traço do operador densidade = {trace:.12f}", field="matrix")
        min_eig = np.min(scipy.linalg.eigh(rho, eigvals_only=True))
        if min_eig < EIGEN_FLOOR:
            raise ValidationError(f"Autovalor negativo {min_eig:.3e}", field="matrix")


QuantumObject = Union[PartitionedState, DensityOperator]


# =============================================================================
# CONSTRUÇÃO DE ESTADOS
# =============================================================================

def basis_state(layout: SubsystemLayout, indices: Sequence[int]) -> PartitionedState:
    """Estado da base computacional |i0 i1 ...⟩."""
    if len(indices) != len(layout):
        raise LayoutError("Um índice por subsistema é necessário")
    for i, (k, d) in enumerate(zip(indices, layout.dims)):
        if not 0 <= k < d:
            raise ValidationError(f"Índice {k} fora do intervalo do subsistema {layout.labels[i]} (dim {d})")
    amps = np.zeros(layout.size, dtype=complex)
    amps[np.ravel_multi_index(tuple(indices), layout.dims) if layout.dims else 0] = 1.0
    return PartitionedState(amps, layout)


def random_state(layout: SubsystemLayout, rng: np.random.Generator) -> PartitionedState:
    """Estado puro Haar-aleatório (gaussiana complexa normalizada)."""
    amps = rng.standard_normal(layout.size) + 1j * rng.standard_normal(layout.size)
    return PartitionedState(amps / np.linalg.norm(amps), layout)


def bell_state(layout: Optional[SubsystemLayout] = None) -> PartitionedState:
    """(|00⟩ + |11⟩)/√2 compartilhado entre Alice e Bob."""
    if layout is None:
        layout = SubsystemLayout((2, 2), (ALICE, BOB), (ANCILLA, ANCILLA))
    if layout.dims != (2, 2):
        raise LayoutError("Par de Bell exige layout (2, 2)")
    return PartitionedState(np.array([1, 0, 0, 1]) / np.sqrt(2), layout)


def pure_density(psi: PartitionedState) -> DensityOperator:
    v = psi.amplitudes
    return DensityOperator(np.outer(v, v.conj()), psi.layout, validate=False)


def as_density(obj: QuantumObject) -> DensityOperator:
    if isinstance(obj, PartitionedState):
        return pure_density(obj)
    return obj


def is_unitary(matrix: np.ndarray, atol: float = 1e-10) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.linalg.norm(matrix.conj().T @ matrix - np.eye(matrix.shape[0])) <= atol)


# =============================================================================
# OPERAÇÕES ESTRUTURAIS
# =============================================================================

def tensor(a: QuantumObject, b: QuantumObject) -> QuantumObject:
    """Produto tensorial; o layout resultante é a concatenação a + b."""
    layout = a.layout.concat(b.layout)
    if isinstance(a, PartitionedState) and isinstance(b, PartitionedState):
        return PartitionedState(np.kron(a.amplitudes, b.amplitudes), layout)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), layout, validate=False)
    raise LayoutError("tensor exige dois objetos do mesmo tipo")


def tensor_all(objects: Sequence[QuantumObject]) -> QuantumObject:
    if not objects:
        raise LayoutError("Lista vazia em tensor_all")
    result = objects[0]
    for obj in objects[1:]:
        result = tensor(result, obj)
    return result


def _check_indices(layout: SubsystemLayout, indices: Sequence[int], nome: str) -> List[int]:
    indices = [int(i) for i in indices]
    if len(set(indices)) != len(indices):
        raise LayoutError(f"{nome}: índices repetidos {indices}")
    for i in indices:
        if not 0 <= i < len(layout):
            raise LayoutError(f"{nome}: índice {i} fora do layout")
    return indices


def permute(obj: QuantumObject, order: Sequence[int]) -> QuantumObject:
    """
    Reordena subsistemas: o novo subsistema k é o antigo order[k].
    """
    order = _check_indices(obj.layout, order, "permute")
    if len(order) != len(obj.layout):
        raise LayoutError("permute exige uma permutação completa")
    layout = obj.layout.subset(order)
    if isinstance(obj, PartitionedState):
        amps = np.transpose(obj.tensor_view, order)
        return PartitionedState(amps.reshape(-1), layout)
    n = len(order)
    rho = obj.matrix.reshape(obj.layout.dims * 2)
    rho = np.transpose(rho, order + [n + i for i in order])
    return DensityOperator(rho.reshape(layout.size, layout.size), layout, validate=False)


def _apply_on_axes(tensor_: np.ndarray, op: np.ndarray, axes: List[int], dims: Sequence[int]) -> np.ndarray:
    k = len(axes)
    op_t = op.reshape([dims[i] for i in axes] * 2)
    result = np.tensordot(op_t, tensor_, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(result, list(range(k)), axes)


def apply_operator(obj: QuantumObject, op: np.ndarray, targets: Sequence[int]) -> QuantumObject:
    """
    Aplica uma matriz aos subsistemas `targets` (na ordem dada).

    Estado puro: U|ψ⟩. Operador densidade: UρU†. A matriz deve ter
    dimensão igual ao produto das dimensões dos alvos, na ordem listada.
    """
    targets = _check_indices(obj.layout, targets, "apply_operator")
    op = np.asarray(op, dtype=complex)
    dim = obj.layout.dim_of(targets)
    if op.shape != (dim, dim):
        raise LayoutError(f"Operador {op.shape} incompatível com alvos {targets} (dim {dim})")
    dims = obj.layout.dims
    if isinstance(obj, PartitionedState):
        out = _apply_on_axes(obj.tensor_view, op, targets, dims)
        return PartitionedState(out.reshape(-1), obj.layout)
    n = len(dims)
    rho = obj.matrix.reshape(dims * 2)
    rho = _apply_on_axes(rho, op, targets, dims * 2)
    rho = _apply_on_axes(rho, op.conj(), [n + t for t in targets], dims * 2)
    return DensityOperator(rho.reshape(obj.layout.size, obj.layout.size), obj.layout, validate=False)


def partial_trace(obj: QuantumObject, keep: Iterable[int]) -> DensityOperator:
    """
    Traço parcial mantendo os subsistemas `keep` (na ordem do layout).

    Raises:
        LayoutError: conjunto `keep` vazio ou índices inválidos
    """
    keep = sorted(_check_indices(obj.layout, list(keep), "partial_trace"))
    if not keep:
        raise LayoutError("partial_trace exige ao menos um subsistema mantido")
    layout = obj.layout
    rest = [i for i in range(len(layout)) if i not in keep]
    d_keep = layout.dim_of(keep)
    d_rest = layout.dim_of(rest)

    if isinstance(obj, PartitionedState):
        m = np.transpose(obj.tensor_view, keep + rest).reshape(d_keep, d_rest)
        rho = m @ m.conj().T
    else:
        n = len(layout)
        t = obj.matrix.reshape(layout.dims * 2)
        t = np.transpose(t, keep + rest + [n + i for i in keep] + [n + i for i in rest])
        t = t.reshape(d_keep, d_rest, d_keep, d_rest)
        rho = np.einsum("ijkj->ik", t)
    rho = (rho + rho.conj().T) / 2
    return DensityOperator(rho, layout.subset(keep), validate=False)


def party_marginal(obj: QuantumObject, party: str) -> DensityOperator:
    return partial_trace(obj, obj.layout.indices(party))


# =============================================================================
# ENTROPIA
# =============================================================================

def entropy_of_probabilities(probs: Iterable[float]) -> float:
    """Entropia de Shannon (bits); valores abaixo de 1e-12 contribuem 0."""
    p = np.asarray(list(probs), dtype=float)
    p = p[p > ENTROPY_CLAMP]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _hermitian_matrix(rho: Union[DensityOperator, np.ndarray]) -> np.ndarray:
    matrix = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError("Matriz quadrada esperada")
    if not np.allclose(matrix, matrix.conj().T, atol=HERMITIAN_ATOL, rtol=0):
        raise ValidationError("Entrada não hermitiana")
    return matrix


def von_neumann_entropy(rho: Union[DensityOperator, np.ndarray]) -> float:
    """
    S(ρ) = −Tr ρ log₂ ρ.

    Autovalores via scipy.linalg.eigh; autovalores < 1e-12 contribuem 0.
    """
    matrix = _hermitian_matrix(rho)
    eigenvalues = scipy.linalg.eigh(matrix, eigvals_only=True)
    value = entropy_of_probabilities(eigenvalues)
    return float(min(value, np.log2(matrix.shape[0])))


def entanglement_entropy(psi: PartitionedState) -> float:
    """Entropia do marginal de Alice (igual à do marginal de Bob)."""
    alice = psi.layout.indices(ALICE)
    bob = psi.layout.indices(BOB)
    if not alice or not bob:
        return 0.0
    m = np.transpose(psi.tensor_view, alice + bob).reshape(psi.layout.dim_of(alice), -1)
    singular = scipy.linalg.svd(m, compute_uv=False)
    return entropy_of_probabilities(singular ** 2)


def log2m(rho: np.ndarray, clamp: float = ENTROPY_CLAMP) -> np.ndarray:
    """log₂ matricial regularizado (autovalores limitados inferiormente por `clamp`)."""
    w, v = scipy.linalg.eigh(rho)
    return (v * np.log2(np.maximum(w, clamp))) @ v.conj().T


# =============================================================================
# FIDELIDADE E DISTÂNCIA
# =============================================================================

def fidelity_pure_mixed(psi: PartitionedState, rho: QuantumObject) -> float:
    """F(|ψ⟩, ρ) = ⟨ψ|ρ|ψ⟩."""
    if psi.layout.dims != rho.layout.dims:
        raise LayoutError("fidelity_pure_mixed: dimensões incompatíveis")
    if isinstance(rho, PartitionedState):
        value = abs(np.vdot(psi.amplitudes, rho.amplitudes)) ** 2
    else:
        value = np.real(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes))
    return float(np.clip(value, 0.0, 1.0))


def trace_distance(rho: QuantumObject, sigma: QuantumObject) -> float:
    """
    T(ρ, σ) = Tr|ρ − σ| (sem o fator ½).

    Para dois estados puros usa a forma fechada 2√(1 − |⟨a|b⟩|²).
    """
    if rho.layout.dims != sigma.layout.dims:
        raise LayoutError("trace_distance: dimensões incompatíveis")
    if isinstance(rho, PartitionedState) and isinstance(sigma, PartitionedState):
        overlap = abs(np.vdot(rho.amplitudes, sigma.amplitudes)) ** 2
        return float(2.0 * np.sqrt(max(0.0, 1.0 - overlap)))
    diff = as_density(rho).matrix - as_density(sigma).matrix
    eigenvalues = scipy.linalg.eigh((diff + diff.conj().T) / 2, eigvals_only=True)
    return float(np.sum(np.abs(eigenvalues)))


def binary_eta(x: float) -> float:
    """η(x) = −x log₂ x, com η(0) = 0."""
    return 0.0 if x <= 0 else float(-x * np.log2(x))


def fannes_bound(T: float, D: int) -> float:
    """
    Limite de Fannes: |S(ρ) − S(σ)| ≤ T·log₂D + η(T), válido para T ≤ 1/e.

    Examples:
        >>> round(fannes_bound(0.2, 4), 4)
        0.8644
        >>> round(fannes_bound(1 / np.e, 2), 4)
        0.8986
    """
    if T < 0:
        raise ValidationError(f"Distância de traço negativa: {T}", field="T")
    if T > 1 / np.e + 1e-12:
        raise ValidationError(f"Fannes exige T ≤ 1/e (recebido {T:.6f})", field="T")
    if D < 1:
        raise ValidationError(f"Dimensão inválida: {D}", field="D")
    return float(T * np.log2(D) + binary_eta(T))


# =============================================================================
# DECOMPOSIÇÃO DE SCHMIDT E CONJUGAÇÃO
# =============================================================================

class SchmidtDecomposition(NamedTuple):
    coefficients: np.ndarray     # λ_k (somam 1), ordem decrescente
    alice_vectors: np.ndarray    # linha k = vetor de Alice
    bob_vectors: np.ndarray      # linha k = vetor de Bob
    alice_layout: SubsystemLayout
    bob_layout: SubsystemLayout
    order: Tuple[int, ...]       # índices originais (Alice primeiro, depois Bob)

    def reconstruct(self) -> PartitionedState:
        amps = np.einsum("k,ka,kb->ab", np.sqrt(self.coefficients), self.alice_vectors, self.bob_vectors)
        state = PartitionedState(amps.reshape(-1), self.alice_layout.concat(self.bob_layout))
        return permute(state, list(np.argsort(self.order)))


def schmidt_decompose(psi: PartitionedState) -> SchmidtDecomposition:
    """
    |ψ⟩ = Σ_k √λ_k |a_k⟩|b_k⟩ via SVD (LAPACK, determinística).

    Coeficientes abaixo de 1e-14 são descartados.
    """
    alice = psi.layout.indices(ALICE)
    bob = psi.layout.indices(BOB)
    if not alice or not bob:
        raise LayoutError("Decomposição de Schmidt exige subsistemas de Alice e de Bob")
    m = np.transpose(psi.tensor_view, alice + bob).reshape(psi.layout.dim_of(alice), -1)
    u, s, vh = scipy.linalg.svd(m, full_matrices=False)
    lam = s ** 2
    keep = lam > SCHMIDT_CUTOFF
    return SchmidtDecomposition(
        coefficients=lam[keep],
        alice_vectors=u[:, keep].T,
        bob_vectors=vh[keep, :],
        alice_layout=psi.layout.subset(alice),
        bob_layout=psi.layout.subset(bob),
        order=tuple(alice + bob),
    )


@singledispatch
def conjugate(obj):
    """Conjugação complexa entrada a entrada na base computacional."""
    if isinstance(obj, np.ndarray):
        return obj.conj()
    raise TypeError(f"conjugate não suporta {type(obj).__name__}")


@conjugate.register
def _(obj: PartitionedState) -> PartitionedState:
    return PartitionedState(obj.amplitudes.conj(), obj.layout)


@conjugate.register
def _(obj: DensityOperator) -> DensityOperator:
    return DensityOperator(obj.matrix.conj(), obj.layout, validate=False)
