"""polystab: SOS synthesis of globally stabilizing polynomial state feedback.

Controllers are synthesized either from a known model or directly from noisy
experiment data, by compiling matrix sum-of-squares conditions into
semidefinite programs and verifying the resulting certificates numerically.
"""

__version__ = '0.3.0'

__all__ = ('__version__',)
