"""
gatecap - Capacidades de Portas de Dois Qubits
===============================================

Biblioteca e CLI para decomposição canônica, capacidade de emaranhamento,
ensembles de informação de Holevo e simulação de protocolos de comunicação
bidirecional com portas de dois qubits.

Autor: GateCap Team
Versão: 1.0.0
"""

__version__ = "1.0.0"
