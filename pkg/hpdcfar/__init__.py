"""
Riemannian geometry on Hermitian positive-definite matrices and the
matrix-CFAR detection pipeline built on it.
"""
import jax

# Every kernel assumes complex128; must run before any array is created.
jax.config.update("jax_enable_x64", True)

__version__ = "0.1.0"
