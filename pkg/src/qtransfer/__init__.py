"""
Double-well quantum state transfer: spin-basis model, counter-diabatic
driving, open-system propagation and protocol grading.
"""

__version__ = '1.0.0'
