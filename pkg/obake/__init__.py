"""
Online biometric-authenticated key exchange: protocol, codec and simulation harness.
"""

__version__ = "0.1.0"
