"""Computational super geometry kernel.

Grassmann and Berezin calculus on the torus ``T^{2|2}``, Wess--Zumino frames
of super Riemann surfaces, and the supersymmetric sigma model with its
component reduction, symmetries and Noether currents.
"""

__version__ = "0.1.0"
