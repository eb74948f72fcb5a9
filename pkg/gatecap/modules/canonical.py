"""
Módulo de Forma Canônica de Portas de Dois Qubits
=================================================

Constrói portas nomeadas e reduz qualquer unitária 4×4 à forma

    U = fase · (L_A ⊗ L_B) · U_d(α₁, α₂, α₃) · (R_A ⊗ R_B)

com U_d(α) = exp(−i Σ_k α_k σ_k⊗σ_k) e α na câmara de Weyl

    π/4 ≥ α₁ ≥ α₂ ≥ |α₃| ≥ 0   (α₃ ≥ 0 quando α₁ = π/4).

Base mágica usada (colunas m0..m3) e autovalores de (XX, YY, ZZ):

| Coluna | Vetor                 | XX | YY | ZZ |
|--------|-----------------------|----|----|----|
| m0     | (|00⟩+|11⟩)/√2        | +1 | −1 | +1 |
| m1     | i(|01⟩+|10⟩)/√2       | +1 | +1 | −1 |
| m2     | (|01⟩−|10⟩)/√2        | −1 | −1 | −1 |
| m3     | i(|00⟩−|11⟩)/√2       | −1 | +1 | +1 |

Nessa base, unitárias locais SU(2)⊗SU(2) viram matrizes ortogonais reais
e U_d é diagonal.

Autor: GateCap Team
Versão: 1.0.0
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np
import scipy.linalg

from gatecap.modules.error_handler import DecompositionError, NonUnitaryError, ValidationError
from gatecap.modules.qmath import PAULIS, conjugate, is_unitary
from gatecap.modules.validacao import validar_lista_numeros

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTES
# =============================================================================

UNITARY_ATOL = 1e-10
RECONSTRUCTION_ATOL = 1e-9
WEYL_ATOL = 1e-9
DEGENERACY_ATOL = 1e-10
OFF_DIAGONAL_ATOL = 1e-9

MAGIC = np.array([
    [1, 0, 0, 1j],
    [0, 1j, 1, 0],
    [0, 1j, -1, 0],
    [1, 0, 0, -1j],
], dtype=complex) / np.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

# λ_j = Σ_k α_k · SIGNS[j, k]
_SIGNS = np.array([
    [1, -1, 1],
    [1, 1, -1],
    [-1, -1, -1],
    [-1, 1, 1],
], dtype=float)

# Constantes fixas para combinar partes real e imaginária na diagonalização
_MIX_CONSTANTS = (0.5772156649015329, 1.6180339887498949, 2.718281828459045,
                  0.3183098861837907, 4.669201609102991)


# =============================================================================
# TIPOS
# =============================================================================

@dataclass(frozen=True, eq=False)
class Gate:
    """Unitária 4×4 sobre (qubit de Alice, qubit de Bob), Alice mais significativo."""
    matrix: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise NonUnitaryError(f"Porta deve ser 4x4 (recebido {matrix.shape})")
        if not is_unitary(matrix, UNITARY_ATOL):
            residuo = np.linalg.norm(matrix.conj().T @ matrix - np.eye(4))
            raise NonUnitaryError(
                f"Porta '{self.name}' não é unitária (resíduo {residuo:.3e})",
                details={"residual": float(residuo)},
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dagger(self) -> "Gate":
        return Gate(self.matrix.conj().T, f"{self.name}†")


@conjugate.register
def _(obj: Gate) -> Gate:
    return Gate(obj.matrix.conj(), f"{obj.name}*")


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    """Parâmetros de Weyl, unitárias locais (A, B) antes/depois e fase global."""
    alphas: Tuple[float, float, float]
    pre_local: Tuple[np.ndarray, np.ndarray]
    post_local: Tuple[np.ndarray, np.ndarray]
    phase: complex

    def reconstruct(self) -> np.ndarray:
        pre = np.kron(*self.pre_local)
        post = np.kron(*self.post_local)
        return self.phase * post @ make_ud(*self.alphas).matrix @ pre

    def residual(self, gate: "Gate") -> float:
        return float(np.linalg.norm(self.reconstruct() - _matrix_of(gate)))

    def canonical_gate(self) -> Gate:
        a1, a2, a3 = self.alphas
        return make_ud(a1, a2, a3)


def _matrix_of(gate) -> np.ndarray:
    if isinstance(gate, Gate):
        return gate.matrix
    matrix = np.asarray(gate, dtype=complex)
    if matrix.shape != (4, 4) or not is_unitary(matrix, UNITARY_ATOL):
        raise NonUnitaryError("Entrada não é uma unitária 4x4")
    return matrix


# =============================================================================
# PORTAS NOMEADAS
# =============================================================================

def make_ud(a1: float, a2: float, a3: float) -> Gate:
    """
    U_d(α) = exp(−i Σ α_k σ_k⊗σ_k), montada em forma fechada na base mágica.

    Examples:
        >>> np.allclose(make_ud(0, 0, 0).matrix, np.eye(4))
        True
    """
    lam = _SIGNS @ np.array([a1, a2, a3], dtype=float)
    matrix = MAGIC @ np.diag(np.exp(-1j * lam)) @ MAGIC_DAG
    return Gate(matrix, f"U_d({a1:.6g}, {a2:.6g}, {a3:.6g})")


def identity() -> Gate:
    return Gate(np.eye(4), "identity")


def cnot() -> Gate:
    """CNOT com controle no qubit de Alice e alvo no de Bob."""
    return Gate(np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ]), "cnot")


def swap() -> Gate:
    return Gate(np.array([
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ]), "swap")


def cz() -> Gate:
    return Gate(np.diag([1, 1, 1, -1]), "cz")


def iswap() -> Gate:
    return Gate(np.array([
        [1, 0, 0, 0],
        [0, 0, 1j, 0],
        [0, 1j, 0, 0],
        [0, 0, 0, 1],
    ]), "iswap")


def sqrt_swap() -> Gate:
    h = (1 + 1j) / 2
    return Gate(np.array([
        [1, 0, 0, 0],
        [0, h, h.conjugate(), 0],
        [0, h.conjugate(), h, 0],
        [0, 0, 0, 1],
    ]), "sqrt_swap")


def b_gate() -> Gate:
    gate = make_ud(np.pi / 4, np.pi / 8, 0.0)
    return Gate(gate.matrix, "b_gate")


GATES: Dict[str, Callable[[], Gate]] = {
    "identity": identity,
    "cnot": cnot,
    "swap": swap,
    "cz": cz,
    "iswap": iswap,
    "sqrt_swap": sqrt_swap,
    "b_gate": b_gate,
}


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """QR de uma matriz de Ginibre com a diagonal de R normalizada para fase."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = scipy.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_gate(seed: int) -> Gate:
    """Porta Haar-aleatória, determinística por semente."""
    rng = np.random.default_rng(seed)
    return Gate(haar_unitary(4, rng), f"haar[{seed}]")


def random_local(rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    return haar_unitary(2, rng), haar_unitary(2, rng)


# =============================================================================
# DECOMPOSIÇÃO
# =============================================================================

def kron_factor(matrix: np.ndarray) -> Tuple[complex, np.ndarray, np.ndarray]:
    """
    Separa uma matriz 4×4 da forma g·(A⊗B) em (g, A, B), det A = det B = 1.

    A entrada de maior módulo é usada como referência.
    """
    a, b = max(((i, j) for i in range(4) for j in range(4)), key=lambda t: abs(matrix[t]))

    f1 = np.zeros((2, 2), dtype=complex)
    f2 = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            f1[(a >> 1) ^ i, (b >> 1) ^ j] = matrix[a ^ (i << 1), b ^ (j << 1)]
            f2[(a & 1) ^ i, (b & 1) ^ j] = matrix[a ^ i, b ^ j]

    f1 = f1 / np.sqrt(np.linalg.det(f1))
    f2 = f2 / np.sqrt(np.linalg.det(f2))

    g = matrix[a, b] / (f1[a >> 1, b >> 1] * f2[a & 1, b & 1])
    if np.real(g) < 0:
        f1 = -f1
        g = -g
    return complex(g), f1, f2


def _fixed_pivot_basis(subspace: np.ndarray) -> np.ndarray:
    """
    Base ortonormal real determinística de span(subspace).

    Gram–Schmidt sobre as projeções de e0..e3 no subespaço; a cada passo o
    pivô é a projeção residual de maior norma, com empate resolvido pelo
    menor índice.
    """
    k = subspace.shape[1]
    q, _ = np.linalg.qr(subspace)
    residuos = q @ q.T
    basis = []
    for _ in range(k):
        normas = np.linalg.norm(residuos, axis=0)
        pivo = int(np.argmax(normas))
        v = residuos[:, pivo] / normas[pivo]
        basis.append(v)
        residuos = residuos - np.outer(v, v @ residuos)
    return np.column_stack(basis)


def _degenerate_clusters(values: np.ndarray, atol: float = DEGENERACY_ATOL) -> List[List[int]]:
    grupos, vistos = [], set()
    for i in range(len(values)):
        if i in vistos:
            continue
        grupo = [j for j in range(len(values)) if j not in vistos and abs(values[j] - values[i]) <= atol]
        vistos.update(grupo)
        grupos.append(grupo)
    return grupos


def _real_orthogonal_eigenbasis(m2: np.ndarray) -> np.ndarray:
    """
    Base ortogonal real que diagonaliza a matriz simétrica unitária m2.

    Re(m2) e Im(m2) comutam; diagonaliza Re + c·Im para uma lista fixa de
    constantes c. Autoespaços degenerados de m2 são substituídos pela base
    de pivô fixo de _fixed_pivot_basis.

    Raises:
        DecompositionError: a base obtida não diagonaliza m2
    """
    real, imag = np.real(m2), np.imag(m2)
    real = (real + real.T) / 2
    imag = (imag + imag.T) / 2
    best, best_off = None, np.inf
    for c in _MIX_CONSTANTS:
        _, p = scipy.linalg.eigh(real + c * imag)
        d = p.T @ m2 @ p
        off = np.linalg.norm(d - np.diag(np.diag(d)))
        if off < best_off:
            best, best_off = p, off
        if off < 1e-12:
            break

    best = best.copy()
    autovalores = np.diag(best.T @ m2 @ best)
    for grupo in _degenerate_clusters(autovalores):
        if len(grupo) > 1:
            best[:, grupo] = _fixed_pivot_basis(best[:, grupo])

    d = best.T @ m2 @ best
    off = float(np.linalg.norm(d - np.diag(np.diag(d))))
    if off > OFF_DIAGONAL_ATOL:
        raise DecompositionError(
            f"Diagonalização ortogonal falhou (fora da diagonal {off:.2e})",
            details={"off_diagonal": off},
        )
    if np.linalg.det(best) < 0:
        best[:, 0] = -best[:, 0]
    return best


class _WeylState:
    """Contabilidade das operações de normalização para a câmara de Weyl."""

    def __init__(self, phase, post_a, post_b, v, pre_a, pre_b):
        self.phase = phase
        self.post_a, self.post_b = post_a, post_b
        self.v = list(v)
        self.pre_a, self.pre_b = pre_a, pre_b

    def shift(self, k: int, s: int):
        # U_d(v) = i·s · U_d(v + s·π/2·e_k) · (σ_k ⊗ σ_k)
        self.v[k] += s * np.pi / 2
        self.phase *= 1j * s
        self.pre_a = PAULIS[k + 1] @ self.pre_a
        self.pre_b = PAULIS[k + 1] @ self.pre_b

    def negate(self, k1: int, k2: int):
        m = 3 - k1 - k2
        self.v[k1] = -self.v[k1]
        self.v[k2] = -self.v[k2]
        self.post_a = self.post_a @ PAULIS[m + 1]
        self.pre_a = PAULIS[m + 1] @ self.pre_a

    def swap(self, k1: int, k2: int):
        m = 3 - k1 - k2
        s = (np.eye(2) - 1j * PAULIS[m + 1]) / np.sqrt(2)
        self.v[k1], self.v[k2] = self.v[k2], self.v[k1]
        self.post_a = self.post_a @ s.conj().T
        self.post_b = self.post_b @ s.conj().T
        self.pre_a = s @ self.pre_a
        self.pre_b = s @ self.pre_b

    def canonicalize(self):
        quarter = np.pi / 4
        for k in range(3):
            while self.v[k] > quarter:
                self.shift(k, -1)
            while self.v[k] <= -quarter:
                self.shift(k, +1)

        for i, j in ((0, 1), (1, 2), (0, 1)):
            if abs(self.v[i]) < abs(self.v[j]):
                self.swap(i, j)

        if self.v[0] < 0:
            self.negate(0, 2)
        if self.v[1] < 0:
            self.negate(1, 2)

        if abs(self.v[0] - quarter) < WEYL_ATOL and self.v[2] < 0:
            self.shift(0, -1)
            self.negate(0, 2)


def decompose(gate) -> CanonicalForm:
    """
    Decompõe uma unitária 4×4 na forma canônica (câmara de Weyl).

    1. normaliza para SU(4) (det^{1/4});
    2. passa para a base mágica e diagonaliza UᵀU com base ortogonal real;
    3. extrai as fases, ajusta o ramo para det = 1 e obtém α;
    4. fatora as partes locais e normaliza α para a câmara de Weyl.

    Raises:
        NonUnitaryError: entrada não unitária
    """
    u = _matrix_of(gate)
    det = np.linalg.det(u)
    phase0 = det ** 0.25
    v = u / phase0

    up = MAGIC_DAG @ v @ MAGIC
    m2 = up.T @ up
    p = _real_orthogonal_eigenbasis(m2)
    d = np.diag(p.T @ m2 @ p)
    theta = np.angle(d) / 2
    if np.real(np.exp(1j * np.sum(theta))) < 0:
        theta[0] += np.pi

    k1 = up @ p @ np.diag(np.exp(-1j * theta))
    k2 = p.T

    phi = float(np.mean(theta))
    lam = phi - theta
    alphas = ((lam[0] + lam[1]) / 2, (lam[1] + lam[3]) / 2, (lam[0] + lam[3]) / 2)

    g_post, post_a, post_b = kron_factor(MAGIC @ k1 @ MAGIC_DAG)
    g_pre, pre_a, pre_b = kron_factor(MAGIC @ k2 @ MAGIC_DAG)
    phase = phase0 * np.exp(1j * phi) * g_post * g_pre

    weyl = _WeylState(phase, post_a, post_b, alphas, pre_a, pre_b)
    weyl.canonicalize()

    form = CanonicalForm(
        alphas=tuple(float(a) for a in weyl.v),
        pre_local=(weyl.pre_a, weyl.pre_b),
        post_local=(weyl.post_a, weyl.post_b),
        phase=complex(weyl.phase),
    )
    residual = form.residual(u)
    if residual > RECONSTRUCTION_ATOL:
        logger.warning(f"⚠️ Resíduo de reconstrução alto: {residual:.3e}")
    else:
        logger.debug(f"📐 Decomposição: α={form.alphas}, resíduo={residual:.2e}")
    return form


def is_canonical_form(gate, atol: float = UNITARY_ATOL) -> bool:
    """Verdadeiro quando U* = U† (vale para U_d)."""
    u = _matrix_of(gate)
    return bool(np.allclose(u.conj(), u.conj().T, atol=atol, rtol=0))


# =============================================================================
# INVARIANTES LOCAIS
# =============================================================================

def local_invariants(gate) -> Tuple[complex, float]:
    """
    Invariantes de Makhlin (G1 complexo, G2 real).

    Examples:
        identidade → (1, 3); CNOT → (0, 1); SWAP → (−1, −3)
    """
    u = _matrix_of(gate)
    up = MAGIC_DAG @ u @ MAGIC
    m = up.T @ up
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr ** 2 / (16 * det)
    g2 = (tr ** 2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(np.real(g2))


def locally_equivalent(a, b, atol: float = 1e-9) -> bool:
    g1a, g2a = local_invariants(a)
    g1b, g2b = local_invariants(b)
    return abs(g1a - g1b) <= atol and abs(g2a - g2b) <= atol


def alphas_from_string(texto: str) -> Tuple[float, float, float]:
    """Converte "a1,a2,a3" em floats (usado por --alphas)."""
    valido, erro, valores = validar_lista_numeros(texto, "alphas", float, quantidade=3)
    if not valido:
        raise ValidationError(erro, field="alphas")
    return tuple(valores)
