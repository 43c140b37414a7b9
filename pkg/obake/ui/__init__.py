"""
User interface components for the obake package.
"""
