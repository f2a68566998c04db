"""Supersymmetric quantum mechanics on the harmonic oscillator.

Darboux/Wronskian partners, confluent chains, coherent states, Painleve
transcendents from extremal states, and the graphene Dirac-Weyl reduction.
"""
from . import coherent, confluent, graphene, painleve, schrodinger, specfun, susy
from .errors import SusyError
from .schrodinger import Potential, WaveFunction, harmonic_oscillator
from .susy import SusyTransform, partner_potential, transform

__version__ = "0.1.0"

__all__ = ["coherent", "confluent", "graphene", "painleve", "schrodinger", "specfun", "susy",
           "SusyError", "Potential", "WaveFunction", "harmonic_oscillator", "SusyTransform",
           "partner_potential", "transform"]
