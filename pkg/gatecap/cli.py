"""
GateCap - Interface de Linha de Comando
=======================================

Comandos:
    decompose      forma canônica (α, locais, fase, resíduo)
    capacity       E_U e E_U⁻ por busca multi-início
    ensemble       uni | bidir | appendix-b | counterexample
    protocol       run | fidelity | superpose | reverse | rates
    bounds         fórmulas fechadas de limites
    verify-chain   Δχ→ = E_U, Δχ↔ = 2E_U, E_U = E_U⁻

Códigos de saída: 0 ok, 1 verificação falhou, 2 erro de entrada,
3 otimização não convergiu.

Uso:
    python -m gatecap decompose --gate cnot
    python -m gatecap capacity --gate swap --restarts 32 --json
    python -m gatecap protocol reverse --script cnot-assisted

Autor: GateCap Team
Versão: 1.0.0
"""

import argparse
import json
import logging
import sys
import time
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from gatecap import __version__
from gatecap.modules.bounds import (
    EPS_CAP, ancilla_bound, bounds_report, chained_fidelity_bound, eta_continuity_bound,
    holevo_lower_bound,
)
from gatecap.modules.canonical import (
    RECONSTRUCTION_ATOL, alphas_from_string, decompose, is_canonical_form, local_invariants, make_ud,
)
from gatecap.modules.capacity import (
    CapacitySearchConfig, capability_layout, disentangling_capability, entangling_capability,
)
from gatecap.modules.config import load_config
from gatecap.modules.ensembles import (
    BACKWARD, BOUNDS_ATOL, FORWARD, appendix_b_ensemble, bidir_chain, build_bidirectional_ensemble,
    build_unidirectional_ensemble, chi_interval, chi_up, counterexample_ensemble, delta_chi_bidir,
    delta_chi_oneway, holevo_chi, identity_correction_maps, marginal_mismatch, oneway_chain,
)
from gatecap.modules.error_handler import (
    EXIT_ASSERTION, EXIT_NONCONVERGENCE, EXIT_OK, ValidationError, handle_errors,
)
from gatecap.modules.protocol import (
    canonicalize_script, classify_rate_set, eta_entanglement, message_fidelity, rate_pair_achieved,
    receiver_ensembles, reverse_protocol, reversed_round_fidelity, superposition_gain,
    superposition_overlap,
)
from gatecap.modules.qmath import random_state
from gatecap.modules.relatorios import Report, render
from gatecap.modules.roteiros import gate_from_source, script_from_source
from gatecap.modules.validacao import validar_lista_numeros

logger = logging.getLogger(__name__)

# Tolerância fixa das identidades exatas (resíduos de construção)
EXACT_ATOL = 1e-9


# =============================================================================
# LOGGING
# =============================================================================

def configurar_logging(nivel: str = "WARNING") -> None:
    """Logs vão para stderr; stdout fica livre para --json / --csv."""
    logging.basicConfig(
        level=getattr(logging, str(nivel).upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


# =============================================================================
# FUNÇÕES AUXILIARES
# =============================================================================

def _formato(args) -> str:
    if getattr(args, "json", False):
        return "json"
    if getattr(args, "csv", False):
        return "csv"
    return "text"


def _diagnostico(args) -> Callable[[Dict[str, Any]], None]:
    def _mostrar(response: Dict[str, Any]) -> None:
        if _formato(args) == "json":
            print(json.dumps(response, ensure_ascii=False, default=str))
        else:
            print(f"❌ {response['error']}", file=sys.stderr)
    return _mostrar


def _emitir(report: Report, args) -> None:
    print(render(report, _formato(args)))


def _config(args, config: Optional[Dict] = None) -> Dict[str, Any]:
    config = dict(config or load_config())
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "tol", None) is not None:
        config["tol"] = args.tol
    return config


def _resolve_gate(args):
    if getattr(args, "alphas", None):
        return make_ud(*alphas_from_string(args.alphas))
    if getattr(args, "gate", None):
        return gate_from_source(args.gate)
    raise ValidationError("Informe --gate <arquivo|nome> ou --alphas a1,a2,a3", field="gate")


def _search_config(args, config: Dict[str, Any]) -> CapacitySearchConfig:
    dims = None
    if getattr(args, "ancilla_dims", None):
        valido, erro, dims = validar_lista_numeros(args.ancilla_dims, "--ancilla-dims", int, quantidade=2, min_valor=1)
        if not valido:
            raise ValidationError(erro, field="ancilla_dims")
    return CapacitySearchConfig.from_config(
        config,
        ancilla_dims=dims,
        restarts=getattr(args, "restarts", None),
        max_iterations=getattr(args, "max_iterations", None),
        workers=getattr(args, "workers", None),
        seed=config["seed"],
    )


def _search_echo(cfg: CapacitySearchConfig) -> Dict[str, Any]:
    return {
        "ancilla_dims": [cfg.ancilla_dim_A, cfg.ancilla_dim_B],
        "restarts": cfg.restarts,
        "max_iterations": cfg.max_iterations,
        "gradient_tolerance": cfg.gradient_tolerance,
        "seed": cfg.seed,
    }


def _complex_matrix(matrix: np.ndarray) -> List[List[List[float]]]:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(matrix)]


def _check(nome: str, valor: float, esperado: float, tol: float, falhas: List[str]) -> Dict[str, Any]:
    ok = bool(abs(valor - esperado) <= tol)
    if not ok:
        falhas.append(nome)
        logger.warning(f"⚠️ Verificação '{nome}' falhou: {valor:.12g} vs {esperado:.12g} (tol {tol:g})")
    return {"value": valor, "expected": esperado, "tol": tol, "pass": ok}


def _codigo(falhas: List[str], convergiu: bool = True) -> int:
    if not convergiu:
        return EXIT_NONCONVERGENCE
    return EXIT_ASSERTION if falhas else EXIT_OK


# =============================================================================
# COMANDOS
# =============================================================================

@handle_errors
def cmd_decompose(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    gate = _resolve_gate(args)
    form = decompose(gate)
    residual = form.residual(gate)
    g1, g2 = local_invariants(gate)
    falhas: List[str] = []
    results = {
        "gate": gate.name,
        "alphas": list(form.alphas),
        "phase": form.phase,
        "pre_local": {"A": _complex_matrix(form.pre_local[0]), "B": _complex_matrix(form.pre_local[1])},
        "post_local": {"A": _complex_matrix(form.post_local[0]), "B": _complex_matrix(form.post_local[1])},
        "residual": residual,
        "invariants": {"G1": g1, "G2": g2},
        "checks": {"residual": _check("residual", residual, 0.0, RECONSTRUCTION_ATOL, falhas)},
    }
    report = Report("decompose", {"gate": args.gate, "alphas": args.alphas}, results,
                    seed=config["seed"], wall_time=time.perf_counter() - inicio)
    _emitir(report, args)
    return _codigo(falhas)


@handle_errors
def cmd_capacity(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    gate = _resolve_gate(args)
    cfg = _search_config(args, config)
    ent = entangling_capability(gate, cfg)
    dis = disentangling_capability(gate, cfg)
    results = {
        "gate": gate.name,
        "E_U": ent.value,
        "E_U_minus": dis.value,
        "lower_bound": True,
        "converged": {"E_U": ent.converged, "E_U_minus": dis.converged},
        "iterations": {"E_U": ent.iterations, "E_U_minus": dis.iterations},
        "entanglement": {
            "E_U": [ent.initial_entanglement, ent.final_entanglement],
            "E_U_minus": [dis.initial_entanglement, dis.final_entanglement],
        },
    }
    table = [
        {"restart": k, "E_U": a, "E_U_minus": b}
        for k, (a, b) in enumerate(zip(ent.per_restart_values, dis.per_restart_values))
    ]
    report = Report("capacity", _search_echo(cfg), results, seed=cfg.seed,
                    wall_time=time.perf_counter() - inicio, table=table)
    _emitir(report, args)
    return _codigo([], ent.converged and dis.converged)


@handle_errors
def cmd_ensemble(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    falhas: List[str] = []
    convergiu = True
    echo: Dict[str, Any] = {"mode": args.mode}

    if args.mode == "counterexample":
        e = counterexample_ensemble()
        maps = identity_correction_maps(e.layout, 2, 2)
        up_f, up_b = chi_up(e, FORWARD), chi_up(e, BACKWARD)
        results = {
            "chi_up": {"->": up_f, "<-": up_b},
            "chi_interval_identity_maps": {"->": list(chi_interval(e, maps, FORWARD)),
                                           "<-": list(chi_interval(e, maps, BACKWARD))},
            "total": up_f + up_b,
        }
        results["checks"] = {"total": _check("total", up_f + up_b, 1.0, 1e-12, falhas)}
    elif args.mode == "appendix-b":
        cfg = _search_config(args, config)
        echo.update(_search_echo(cfg))
        phi = random_state(capability_layout(cfg.ancilla_dim_A, cfg.ancilla_dim_B),
                           np.random.default_rng(cfg.seed))
        produto = appendix_b_ensemble(phi)
        mismatch = marginal_mismatch(produto, build_bidirectional_ensemble(phi))
        results = {
            "marginal_mismatch": mismatch,
            "chi_up": {"->": chi_up(produto, FORWARD), "<-": chi_up(produto, BACKWARD)},
            "checks": {"marginals": _check("marginals", mismatch, 0.0, 1e-12, falhas)},
        }
    else:
        gate = _resolve_gate(args)
        cfg = _search_config(args, config)
        echo.update(_search_echo(cfg))
        echo["gate"] = gate.name
        # E_U de uma busca independente da cadeia
        ent = entangling_capability(gate, cfg)
        tol = config["tol"]
        if args.mode == "uni":
            chain = oneway_chain(gate, cfg)
            results = {
                "delta_chi_forward": chain.delta_chi,
                "E_U": ent.value,
                "E_U_minus": chain.search.value,
                "depolarization_residual": chain.residual,
                "checks": {
                    "depolarization": _check("depolarization", chain.residual, 0.0, 1e-12, falhas),
                    "delta_chi_eq_E_U": _check("delta_chi_eq_E_U", chain.delta_chi, ent.value, tol / 2, falhas),
                },
            }
        else:
            chain = bidir_chain(gate, cfg, strict=not args.lenient)
            results = {
                "delta_chi_bidir": chain.delta_chi,
                "E_U": ent.value,
                "E_U_minus": chain.search.value,
                "chi_intervals": [list(par) for par in chain.lo_up],
                "checks": {
                    "chi_lo_eq_chi_up": _check("chi_lo_eq_chi_up", chain.residual, 0.0, BOUNDS_ATOL, falhas),
                    "delta_chi_eq_2E_U": _check("delta_chi_eq_2E_U", chain.delta_chi, 2 * ent.value, tol, falhas),
                },
            }
        echo["tol"] = tol
        convergiu = chain.search.converged and ent.converged

    report = Report("ensemble", echo, results, seed=config["seed"], wall_time=time.perf_counter() - inicio)
    _emitir(report, args)
    return _codigo(falhas, convergiu)


def _protocol_run(result) -> Dict[str, Any]:
    return {
        "eps": result.eps,
        "norms": {f"{x},{y}": float(np.linalg.norm(s.amplitudes)) for (x, y), s in result.final_states.items()},
    }


@handle_errors
def cmd_protocol(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    if not args.script:
        raise ValidationError("Informe --script <arquivo|nome>", field="script")
    script = script_from_source(args.script)
    workers = args.workers or 1
    falhas: List[str] = []
    table = None
    result = message_fidelity(script, workers=workers)
    echo = {"script": script.name, "action": args.action, "n_a": script.n_a, "n_b": script.n_b, "t": script.t}

    if args.action == "run":
        results = _protocol_run(result)
        table = [{"x": x, "y": y, "eps_xy": e} for (x, y), e in result.eps_xy.items()]
    elif args.action == "fidelity":
        ens_a, ens_b = receiver_ensembles(script, result)
        chi_a, chi_b = holevo_chi(ens_a), holevo_chi(ens_b)
        results = {"eps": result.eps, "chi_alice": chi_a, "chi_bob": chi_b}
        if result.eps <= EPS_CAP:
            lim_a = holevo_lower_bound(script.n_b, script.n, result.eps)
            lim_b = holevo_lower_bound(script.n_a, script.n, result.eps)
            results["holevo_lower_bound"] = {"alice": lim_a, "bob": lim_b}
            for nome, valor, limite in (("holevo_alice", chi_a, lim_a), ("holevo_bob", chi_b, lim_b)):
                if valor < limite - EXACT_ATOL:
                    falhas.append(nome)
        table = [{"x": x, "y": y, "eps_xy": e} for (x, y), e in result.eps_xy.items()]
    elif args.action == "superpose":
        direct = eta_entanglement(script, direct=True, result=result)
        overlap = superposition_overlap(script, result)
        results = {
            "eps": result.eps,
            "E_eta_direct": direct,
            "overlap": overlap,
            "gain": superposition_gain(script, result),
        }
        closed = eta_entanglement(script, result=result)
        results["E_eta_closed_form"] = closed
        K, _ = ancilla_bound(script.n, script.initial_ancilla.layout.size, max(script.t, 1))
        tol = EXACT_ATOL if result.eps == 0 else eta_continuity_bound(result.eps, script.n, K, script.t)
        results["checks"] = {
            "closed_form": _check("closed_form", direct, closed, tol, falhas),
            "overlap": {"pass": overlap >= 1 - result.eps - EXACT_ATOL},
        }
        if not results["checks"]["overlap"]["pass"]:
            falhas.append("overlap")
    elif args.action == "reverse":
        base = script if is_canonical_form(script.gate) else canonicalize_script(script)
        rev = reverse_protocol(base)
        fidelidades = {(x, y): reversed_round_fidelity(base, x, y, rev) for x, y in base.messages()}
        minimo = min(fidelidades.values())
        limite = chained_fidelity_bound(1, result.eps) - EXACT_ATOL
        results = {
            "gate_applications": rev.t,
            "local_steps": len(rev.steps),
            "eps_forward": result.eps,
            "min_round_fidelity": minimo,
            "fidelity_bound": limite,
            "checks": {"gate_count": {"pass": rev.t == 2 * script.t}, "fidelity": {"pass": minimo >= limite}},
        }
        if rev.t != 2 * script.t:
            falhas.append("gate_count")
        if minimo < limite:
            falhas.append("fidelity")
        table = [{"x": x, "y": y, "fidelity": f} for (x, y), f in fidelidades.items()]
    else:
        eps_target = args.eps if args.eps is not None else EXACT_ATOL
        par = rate_pair_achieved(script, eps_target, result)
        results = {
            "eps": result.eps,
            "eps_target": eps_target,
            "rate_pair": list(par) if par else None,
            "rate_set": classify_rate_set(script),
        }

    report = Report("protocol", echo, results, seed=config["seed"],
                    wall_time=time.perf_counter() - inicio, table=table)
    _emitir(report, args)
    return _codigo(falhas)


@handle_errors
def cmd_bounds(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    faltando = [flag for flag, valor in (("--rates", args.rates), ("--n", args.n), ("--d", args.d), ("--tau", args.tau))
                if valor is None]
    if faltando:
        raise ValidationError(f"Parâmetros obrigatórios ausentes: {', '.join(faltando)}", field=faltando[0])
    valido, erro, rates = validar_lista_numeros(args.rates, "--rates", float, quantidade=4, min_valor=0)
    if not valido:
        raise ValidationError(erro, field="rates")
    report_bounds = bounds_report(
        tuple(rates), n=args.n, d=args.d, tau=args.tau, M=args.M, eps=args.eps,
        eps_psi=args.eps_psi, E0=args.E0, C=args.C,
    )
    echo = {"rates": rates, "n": args.n, "d": args.d, "tau": args.tau, "M": args.M,
            "eps": args.eps, "eps_psi": args.eps_psi, "E0": args.E0, "C": args.C}
    report = Report("bounds", echo, report_bounds.to_dict(), seed=config["seed"],
                    wall_time=time.perf_counter() - inicio)
    _emitir(report, args)
    return EXIT_OK


@handle_errors
def cmd_verify_chain(args, config: Optional[Dict] = None, on_error=None) -> int:
    inicio = time.perf_counter()
    config = _config(args, config)
    tol = config["tol"]
    gate = _resolve_gate(args)
    cfg = _search_config(args, config)
    ud = decompose(gate).canonical_gate()

    ent = entangling_capability(ud, cfg)
    dis = disentangling_capability(ud, cfg)
    uni = build_unidirectional_ensemble(dis.best_state)
    d_fwd = delta_chi_oneway(ud, uni)
    bi = build_bidirectional_ensemble(dis.best_state)
    d_bidir = delta_chi_bidir(ud, bi, strict=True)

    falhas: List[str] = []
    e_u = ent.value
    nao_computavel = "não computável diretamente; valor da cadeia instanciada"
    results = {
        "gate": gate.name,
        "E_U": e_u,
        "E_U_minus": dis.value,
        "delta_chi_forward": d_fwd,
        "delta_chi_bidir": d_bidir,
        "chain": {
            "C_plus_E": {"value": 2 * e_u, "note": nao_computavel},
            "2C_plus": {"value": 2 * e_u, "note": nao_computavel},
            "2E_U": 2 * e_u,
            "delta_chi_bidir": d_bidir,
        },
        "checks": {
            "delta_chi_forward_eq_E_U": _check("delta_chi_forward_eq_E_U", d_fwd, e_u, tol, falhas),
            "delta_chi_bidir_eq_2E_U": _check("delta_chi_bidir_eq_2E_U", d_bidir, 2 * e_u, tol, falhas),
            "E_U_eq_E_U_minus": _check("E_U_eq_E_U_minus", e_u, dis.value, tol, falhas),
        },
    }
    logger.info(f"🧪 Cadeia para '{gate.name}': {len(falhas)} verificação(ões) falharam")
    echo = dict(_search_echo(cfg), tol=tol, gate=gate.name)
    report = Report("verify-chain", echo, results, seed=cfg.seed, wall_time=time.perf_counter() - inicio)
    _emitir(report, args)
    return _codigo(falhas, ent.converged and dis.converged)


# =============================================================================
# PARSER
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    comum = argparse.ArgumentParser(add_help=False)
    saida = comum.add_mutually_exclusive_group()
    saida.add_argument("--json", action="store_true", help="Relatório em JSON")
    saida.add_argument("--csv", action="store_true", help="Relatório em CSV")
    comum.add_argument("--seed", type=int, default=None, help="Semente (padrão 0)")
    comum.add_argument("--tol", type=float, default=None, help="Tolerância das verificações")
    comum.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    comum.add_argument("--workers", type=int, default=None, help="Threads para reinícios / pares de mensagens")

    porta = argparse.ArgumentParser(add_help=False)
    porta.add_argument("--gate", default=None, help="Arquivo JSON ou nome (cnot, swap, iswap, ...)")
    porta.add_argument("--alphas", default=None, help="Parâmetros canônicos a1,a2,a3")

    busca = argparse.ArgumentParser(add_help=False)
    busca.add_argument("--ancilla-dims", default=None, help="Dimensões das ancilas dA,dB")
    busca.add_argument("--restarts", type=int, default=None, help="Número de reinícios")
    busca.add_argument("--max-iterations", type=int, default=None, help="Iterações por reinício")

    parser = argparse.ArgumentParser(prog="gatecap", description="Capacidades de portas de dois qubits")
    parser.add_argument("--version", action="version", version=f"gatecap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[comum, porta], help="Forma canônica")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("capacity", parents=[comum, porta, busca], help="E_U e E_U⁻")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("ensemble", parents=[comum, porta, busca], help="Ensembles de Holevo")
    p.add_argument("mode", choices=["uni", "bidir", "appendix-b", "counterexample"])
    p.add_argument("--lenient", action="store_true", help="χ_lo ≠ χ_up gera aviso em vez de erro")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("protocol", parents=[comum], help="Roteiros de protocolo")
    p.add_argument("action", choices=["run", "fidelity", "superpose", "reverse", "rates"])
    p.add_argument("--script", default=None, help="Arquivo JSON ou nome de roteiro distribuído")
    p.add_argument("--eps", type=float, default=None, help="ε alvo para 'rates'")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("bounds", parents=[comum], help="Limites em forma fechada")
    p.add_argument("--rates", default=None, help="R'→,R'←,R→,R←")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--tau", type=int, default=None)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps-psi", type=float, default=0.0)
    p.add_argument("--E0", type=float, default=1.0)
    p.add_argument("--C", type=float, default=0.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("verify-chain", parents=[comum, porta, busca], help="Cadeia de desigualdades")
    p.set_defaults(func=cmd_verify_chain)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config()
    configurar_logging(args.log_level or config["log_level"])
    if args.workers is not None:
        config["workers"] = args.workers
    return args.func(args, config=config, on_error=_diagnostico(args))


if __name__ == "__main__":
    sys.exit(main())
