"""dualion: pulse-level simulator and fitting toolkit for dual-type
171Yb+ trapped-ion qubits (S1/2 and F7/2 clock-state encodings).
"""

__version__ = "0.1.0"
