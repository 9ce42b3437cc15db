"""
qbm-sim: Kerr parametric oscillator and OPO network simulator
"""

__version__ = "1.0.0"
