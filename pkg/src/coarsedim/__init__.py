"""Desk-scale coarse geometry toolkit.

Finite metric spaces, scale-parameterized cover decompositions, nerve and
mapping-cylinder machinery, dimension-lowering map assembly, and group
constructions (Cayley balls, free products, amalgams, hyperbolization)
with measured-not-assumed Lipschitz constants throughout.
"""

__version__ = "0.1.0"
