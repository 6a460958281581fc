"""Truncated Calderon-Zygmund operators on Lipschitz domains.

Submodules: geometry (domains and windows), whitney (oriented coverings),
poly (approximating polynomials), czop (kernels and transforms), carleson
(tree and shadow conditions), keylemma (Sobolev norms and boundedness
probes), cli (command line entry point).
"""

__version__ = "0.1.0"
