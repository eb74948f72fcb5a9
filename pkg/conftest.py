"""Garante que o pacote gatecap seja importável a partir da raiz do repositório."""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
