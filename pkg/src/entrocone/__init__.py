"""Entropic characterization of marginal scenarios and causal structures.

Exact rational tools for Shannon cones, Fourier-Motzkin projection of causal
structures onto observable marginals, symmetry classification of the
resulting inequalities, translation to probabilities, and evaluation on
classical and quantum boxes.
"""

__version__ = "0.1.0"
