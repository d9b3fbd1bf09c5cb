"""Quantum process calculus toolkit.

Parse process definitions, enforce no-cloning with a linear type checker,
execute them under a probabilistic labelled-transition semantics backed by
a state-vector simulator, and decide probabilistic branching bisimilarity.
"""

__version__ = "0.1.0"
