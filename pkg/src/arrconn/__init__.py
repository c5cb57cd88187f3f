"""Flat torsion-free logarithmic connections on hyperplane-arrangement
complements: exact lattice combinatorics and residue criteria, the
Lauricella family on the braid arrangement, cone-metric existence and
signature formulas, and numerical holonomy."""

__version__ = "0.1.0"
