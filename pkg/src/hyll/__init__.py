"""Hybrid linear logic over monoidal constraint domains.

Subpackages: worlds (constraint domains), syntax (propositions), kernel
(certificates and checking), metatheory (admissible transformations),
focusing (proof search), spi (stochastic pi-calculus frontend), parser
and cli (surface syntax and command line).
"""

__version__ = "0.1.0"
