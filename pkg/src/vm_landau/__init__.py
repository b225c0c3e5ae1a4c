"""Linearized relativistic Vlasov-Maxwell: kernels, dispersion, Green functions, mode solver."""
__version__ = "0.1.0"
