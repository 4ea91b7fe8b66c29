"""
MALab - a numerical laboratory for degenerate Monge-Ampere equations
near the boundary.
"""

__version__ = "0.1.0"

__all__ = [
    '__version__'
]
