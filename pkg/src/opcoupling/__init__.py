"""Constructive coupling relations for complex matrices.

Schur coupling, matricial coupling and equivalence after (one-sided)
extension, realized as verified matrix algorithms, plus a Hankel/Toeplitz
finite-section experiment harness for symbols on the unit circle.
"""

__version__ = "0.1.0"
