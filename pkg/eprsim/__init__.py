"""
Classical simulation of POVM measurements on an EPR pair with shared randomness and communication
"""

__version__ = '2026.10.17'
