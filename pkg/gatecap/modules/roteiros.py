"""
Módulo de Roteiros e Arquivos de Porta
======================================

Roteiros de protocolo distribuídos com o pacote (construídos em código e
validados na criação) e o formato JSON de roteiros e portas.

Roteiros disponíveis:
---------------------
| Nome               | (n_a, n_b) | t | Ancila inicial        | E(|η⟩) |
|--------------------|------------|---|-----------------------|--------|
| cnot-forward       | (1, 0)     | 1 | |00⟩                  | 1      |
| swap-exchange      | (1, 1)     | 1 | |00⟩                  | 2      |
| cnot-assisted      | (1, 1)     | 1 | 1 ebit                | 2      |
| cnot-assisted-bell | (1, 1)     | 1 | 2 ebits (1 intocado)  | 3      |
| swap-assisted      | (2, 2)     | 1 | 2 ebits               | 4      |
| identity           | (0, 0)     | 1 | |00⟩                  | 0      |

Formato de porta (JSON), um dos campos:
    {"name": "cnot"} | {"alphas": [a1, a2, a3]} | {"matrix": [[[re, im], ...], ...]}

Formato de roteiro (JSON):
    {"name", "n_a", "n_b", "gate": <porta>,
     "layout": [{"label", "dim", "party", "role"}, ...],
     "steps": [{"alice": [{"matrix", "targets": [rótulos]}], "bob": [...]}, ...],
     "initial_ancilla": [[re, im], ...],
     "input_registers": [rótulo A, rótulo B], "output_registers": [...]}

Autor: GateCap Team
Versão: 1.0.0
"""

import json
import logging
import os
from typing import Any, Callable, Dict, List

import numpy as np

from gatecap.modules.canonical import GATES, Gate, identity, make_ud
from gatecap.modules.error_handler import GateCapacityError, ScriptFormatError, ValidationError
from gatecap.modules.protocol import LocalOp, LocalStep, ProtocolScript, as_unitary
from gatecap.modules.qmath import (
    ALICE, ANCILLA, BOB, GATE_QUBIT, MESSAGE,
    PartitionedState, basis_state, bell_state, make_layout, permute, tensor,
)
from gatecap.modules.validacao import (
    validar_dict, validar_lista_numeros, validar_matriz_complexa, validar_numero,
)

logger = logging.getLogger(__name__)

# =============================================================================
# MATRIZES AUXILIARES
# =============================================================================

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)


def swap_matrix(dim: int) -> np.ndarray:
    """Troca dois registradores de dimensão `dim`."""
    matrix = np.zeros((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        for b in range(dim):
            matrix[b * dim + a, a * dim + b] = 1.0
    return matrix


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _controlled_paulis() -> np.ndarray:
    """Bloco x (registrador de 4 níveis) aplica X^{x_lo} Z^{x_hi} no qubit alvo."""
    blocks = [np.linalg.matrix_power(X, x & 1) @ np.linalg.matrix_power(Z, x >> 1) for x in range(4)]
    matrix = np.zeros((8, 8), dtype=complex)
    for x, block in enumerate(blocks):
        matrix[2 * x:2 * x + 2, 2 * x:2 * x + 2] = block
    return matrix


def _four_qubit_layout(n: int, gate_a: str = "a", gate_b: str = "b"):
    dim = 2 ** n
    return make_layout([
        ("A1", dim, ALICE, MESSAGE),
        (gate_a, 2, ALICE, GATE_QUBIT),
        (gate_b, 2, BOB, GATE_QUBIT),
        ("B1", dim, BOB, MESSAGE),
    ])


# =============================================================================
# ROTEIROS DISTRIBUÍDOS
# =============================================================================

def cnot_forward() -> ProtocolScript:
    """
    1 bit de Alice para Bob: Alice troca A1↔a, a CNOT copia a em b, Bob
    troca b↔B1. Ao final c_xy = |x⟩_a|0⟩_b.
    """
    layout = _four_qubit_layout(1)
    swap = swap_matrix(2)
    return ProtocolScript(
        gate=GATES["cnot"](),
        layout=layout,
        n_a=1,
        n_b=0,
        steps=(
            LocalStep(alice=(LocalOp(swap, (0, 1)),)),
            LocalStep(bob=(LocalOp(swap, (2, 3)),)),
        ),
        initial_ancilla=basis_state(layout.subset([1, 2]), [0, 0]),
        name="cnot-forward",
    )


def noisy_cnot_forward(theta: float) -> ProtocolScript:
    """cnot-forward seguido de Ry(θ) em B1; ε = sin²(θ/2)."""
    base = cnot_forward()
    last = base.steps[-1]
    steps = (base.steps[0], LocalStep(last.alice, last.bob + (LocalOp(ry(theta), (3,)),)))
    return ProtocolScript(
        gate=base.gate,
        layout=base.layout,
        n_a=1,
        n_b=0,
        steps=steps,
        initial_ancilla=base.initial_ancilla,
        name=f"cnot-forward-ry({theta:.6g})",
    )


def swap_exchange() -> ProtocolScript:
    """Troca de 1 bit em cada direção com SWAP, sem ancila emaranhada."""
    layout = _four_qubit_layout(1)
    swap = swap_matrix(2)
    step = LocalStep(alice=(LocalOp(swap, (0, 1)),), bob=(LocalOp(swap, (2, 3)),))
    return ProtocolScript(
        gate=GATES["swap"](),
        layout=layout,
        n_a=1,
        n_b=1,
        steps=(step, step),
        initial_ancilla=basis_state(layout.subset([1, 2]), [0, 0]),
        name="swap-exchange",
    )


def cnot_assisted(extra_bell: bool = False) -> ProtocolScript:
    """
    1 bit em cada direção com uma CNOT e um par de Bell em (a, b).

    Alice aplica X^x em a, Bob aplica Z^y em b; após a CNOT, a guarda
    (−1)^{xy} H|y⟩ e b guarda |x⟩. Alice decodifica com H e ambos trocam
    com os registradores de mensagem. Com extra_bell, um segundo par (e, f)
    é carregado intocado.
    """
    swap = swap_matrix(2)
    if extra_bell:
        layout = make_layout([
            ("A1", 2, ALICE, MESSAGE),
            ("e", 2, ALICE, ANCILLA),
            ("a", 2, ALICE, GATE_QUBIT),
            ("b", 2, BOB, GATE_QUBIT),
            ("f", 2, BOB, ANCILLA),
            ("B1", 2, BOB, MESSAGE),
        ])
        a, b, b1 = 2, 3, 5
        pairs = tensor(bell_state(layout.subset([1, 4])), bell_state(layout.subset([2, 3])))
        ancilla = permute(pairs, [0, 2, 3, 1])
    else:
        layout = _four_qubit_layout(1)
        a, b, b1 = 1, 2, 3
        ancilla = bell_state(layout.subset([1, 2]))

    steps = (
        LocalStep(alice=(LocalOp(CNOT, (0, a)),), bob=(LocalOp(CZ, (b1, b)),)),
        LocalStep(
            alice=(LocalOp(H, (a,)), LocalOp(swap, (0, a))),
            bob=(LocalOp(swap, (b, b1)),),
        ),
    )
    return ProtocolScript(
        gate=GATES["cnot"](),
        layout=layout,
        n_a=1,
        n_b=1,
        steps=steps,
        initial_ancilla=ancilla,
        name="cnot-assisted-bell" if extra_bell else "cnot-assisted",
    )


def swap_assisted() -> ProtocolScript:
    """
    Codificação superdensa nos dois sentidos: 2 bits por direção com um
    SWAP e dois pares de Bell (a, b2) e (a2, b).
    """
    layout = make_layout([
        ("A1", 4, ALICE, MESSAGE),
        ("a", 2, ALICE, GATE_QUBIT),
        ("a2", 2, ALICE, ANCILLA),
        ("b2", 2, BOB, ANCILLA),
        ("b", 2, BOB, GATE_QUBIT),
        ("B1", 4, BOB, MESSAGE),
    ])
    pairs = tensor(bell_state(layout.subset([1, 3])), bell_state(layout.subset([2, 4])))
    ancilla = permute(pairs, [0, 2, 1, 3])

    encode = _controlled_paulis()
    swap4 = swap_matrix(4)
    steps = (
        LocalStep(alice=(LocalOp(encode, (0, 1)),), bob=(LocalOp(encode, (5, 4)),)),
        LocalStep(
            alice=(LocalOp(CNOT, (2, 1)), LocalOp(H, (2,)), LocalOp(swap4, (0, 2, 1))),
            bob=(LocalOp(CNOT, (3, 4)), LocalOp(H, (3,)), LocalOp(swap4, (5, 3, 4))),
        ),
    )
    return ProtocolScript(
        gate=GATES["swap"](),
        layout=layout,
        n_a=2,
        n_b=2,
        steps=steps,
        initial_ancilla=ancilla,
        name="swap-assisted",
    )


def identity_script(n_a: int = 0, n_b: int = 0, t: int = 1) -> ProtocolScript:
    """Nenhuma operação local, porta identidade: o estado de entrada não muda."""
    layout = _four_qubit_layout(max(n_a, n_b))
    return ProtocolScript(
        gate=identity(),
        layout=layout,
        n_a=n_a,
        n_b=n_b,
        steps=tuple(LocalStep() for _ in range(t + 1)),
        initial_ancilla=basis_state(layout.subset([1, 2]), [0, 0]),
        name="identity",
    )


SHIPPED_SCRIPTS: Dict[str, Callable[[], ProtocolScript]] = {
    "cnot-forward": cnot_forward,
    "swap-exchange": swap_exchange,
    "cnot-assisted": cnot_assisted,
    "cnot-assisted-bell": lambda: cnot_assisted(extra_bell=True),
    "swap-assisted": swap_assisted,
    "identity": identity_script,
}


# =============================================================================
# CODEC JSON
# =============================================================================

def _complex_list(values) -> List[List[float]]:
    return [[float(v.real), float(v.imag)] for v in np.ravel(values)]


def _matrix_to_list(matrix: np.ndarray) -> List[List[List[float]]]:
    return [_complex_list(row) for row in np.asarray(matrix)]


def _matrix_from(valor: Any, nome: str, dimensao: int = None) -> np.ndarray:
    valido, erro, matriz = validar_matriz_complexa(valor, nome, dimensao)
    if not valido:
        raise ScriptFormatError(erro)
    return matriz


def gate_to_dict(gate: Gate) -> Dict[str, Any]:
    return {"name": gate.name, "matrix": _matrix_to_list(gate.matrix)}


def gate_from_dict(dados: Dict[str, Any]) -> Gate:
    """
    Porta a partir de {"matrix"}, {"alphas"} ou {"name"} (nessa precedência).

    Matrizes com resíduo unitário entre 1e-10 e 1e-8 são projetadas na
    unitária mais próxima; acima de 1e-8 são rejeitadas.
    """
    valido, erro = validar_dict(dados, "porta")
    if not valido:
        raise ScriptFormatError(erro)
    nome = dados.get("name", "custom")
    if "matrix" in dados:
        matriz = _matrix_from(dados["matrix"], "porta.matrix", 4)
        return Gate(as_unitary(matriz, "porta"), str(nome))
    if "alphas" in dados:
        valido, erro, alphas = validar_lista_numeros(dados["alphas"], "porta.alphas", float, quantidade=3)
        if not valido:
            raise ScriptFormatError(erro)
        return make_ud(*alphas)
    if nome in GATES:
        return GATES[nome]()
    raise ScriptFormatError(
        f"Porta desconhecida: '{nome}' (use uma de: {', '.join(sorted(GATES))}, 'alphas' ou 'matrix')"
    )


def _load_json(caminho: str) -> Dict[str, Any]:
    try:
        with open(caminho, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ScriptFormatError(f"JSON inválido em {caminho}: {e}") from None
    except OSError as e:
        raise ValidationError(f"Não foi possível ler {caminho}: {e}", field="arquivo") from None


def gate_from_source(source: str) -> Gate:
    """Nome de porta conhecida ou caminho de arquivo JSON."""
    if os.path.isfile(source):
        logger.debug(f"📦 Lendo porta de {source}")
        return gate_from_dict(_load_json(source))
    if source in GATES:
        return GATES[source]()
    raise ValidationError(
        f"'{source}' não é arquivo nem porta conhecida ({', '.join(sorted(GATES))})", field="gate"
    )


def script_to_dict(script: ProtocolScript) -> Dict[str, Any]:
    layout = script.layout
    labels = layout.labels

    def _ops(ops):
        return [{"matrix": _matrix_to_list(op.matrix), "targets": [labels[t] for t in op.targets]} for op in ops]

    return {
        "name": script.name,
        "n_a": script.n_a,
        "n_b": script.n_b,
        "gate": gate_to_dict(script.gate),
        "layout": [
            {"label": labels[i], "dim": layout.dims[i], "party": layout.parties[i], "role": layout.roles[i]}
            for i in range(len(layout))
        ],
        "steps": [{"alice": _ops(step.alice), "bob": _ops(step.bob)} for step in script.steps],
        "initial_ancilla": _complex_list(script.initial_ancilla.amplitudes),
        "input_registers": [labels[i] for i in script.input_registers],
        "output_registers": [labels[i] for i in script.output_registers],
    }


def script_from_dict(dados: Dict[str, Any]) -> ProtocolScript:
    """
    Raises:
        ScriptFormatError: campos ausentes ou malformados
        LayoutError / NonUnitaryError: roteiro inconsistente
    """
    valido, erro = validar_dict(
        dados, "roteiro", campos_obrigatorios=["n_a", "n_b", "gate", "layout", "steps", "initial_ancilla"]
    )
    if not valido:
        raise ScriptFormatError(erro)

    entradas = []
    for i, item in enumerate(dados["layout"]):
        valido, erro = validar_dict(item, f"layout[{i}]", campos_obrigatorios=["label", "dim", "party", "role"])
        if not valido:
            raise ScriptFormatError(erro)
        ok, erro_dim, dim = validar_numero(item["dim"], f"layout[{i}].dim", int, min_valor=1)
        if not ok:
            raise ScriptFormatError(erro_dim)
        entradas.append((str(item["label"]), dim, item["party"], item["role"]))
    layout = make_layout(entradas)

    def _ops(lista, k):
        ops = []
        for j, item in enumerate(lista):
            valido, erro = validar_dict(item, f"steps[{k}].op[{j}]", campos_obrigatorios=["matrix", "targets"])
            if not valido:
                raise ScriptFormatError(erro)
            targets = tuple(layout.index_of(label) for label in item["targets"])
            ops.append(LocalOp(_matrix_from(item["matrix"], f"steps[{k}].matrix"), targets))
        return tuple(ops)

    steps = tuple(
        LocalStep(_ops(step.get("alice", []), k), _ops(step.get("bob", []), k))
        for k, step in enumerate(dados["steps"])
    )

    amplitudes = []
    for entrada in dados["initial_ancilla"]:
        if not isinstance(entrada, (list, tuple)) or len(entrada) != 2:
            raise ScriptFormatError("initial_ancilla deve ser uma lista de pares [re, im]")
        amplitudes.append(complex(float(entrada[0]), float(entrada[1])))

    def _registers(chave):
        labels = dados.get(chave)
        return tuple(layout.index_of(label) for label in labels) if labels else ()

    inputs = _registers("input_registers")
    rest = [i for i in range(len(layout)) if i not in (inputs or _default_inputs(layout))]
    return ProtocolScript(
        gate=gate_from_dict(dados["gate"]),
        layout=layout,
        n_a=int(dados["n_a"]),
        n_b=int(dados["n_b"]),
        steps=steps,
        initial_ancilla=PartitionedState(np.array(amplitudes), layout.subset(rest)),
        input_registers=inputs,
        output_registers=_registers("output_registers"),
        name=str(dados.get("name", "roteiro")),
    )


def _default_inputs(layout):
    alice, bob = layout.find(ALICE, MESSAGE), layout.find(BOB, MESSAGE)
    if not alice or not bob:
        raise ScriptFormatError("Roteiro sem registradores de mensagem de Alice e Bob")
    return alice[0], bob[0]


def script_from_source(source: str) -> ProtocolScript:
    """Nome de roteiro distribuído ou caminho de arquivo JSON."""
    if os.path.isfile(source):
        logger.debug(f"📦 Lendo roteiro de {source}")
        try:
            return script_from_dict(_load_json(source))
        except GateCapacityError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ScriptFormatError(f"Roteiro malformado em {source}: {e}") from None
    if source in SHIPPED_SCRIPTS:
        return SHIPPED_SCRIPTS[source]()
    raise ValidationError(
        f"'{source}' não é arquivo nem roteiro conhecido ({', '.join(sorted(SHIPPED_SCRIPTS))})",
        field="script",
    )


def save_script(script: ProtocolScript, caminho: str) -> None:
    with open(caminho, "w", encoding="utf-8") as f:
        json.dump(script_to_dict(script), f, indent=2, ensure_ascii=False)
    logger.info(f"✅ Roteiro '{script.name}' salvo em {caminho}")
