"""
Interface definitions for the obake simulation harness.
"""
