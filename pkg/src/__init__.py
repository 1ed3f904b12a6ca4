# HPKernel - Hua-Pickrell measures, pseudo-Jacobi kernels and their limits
__version__ = "1.0.0"
__author__ = "HPKernel Team"
__description__ = "Kernels, samplers and ergodic diagnostics for Hua-Pickrell random matrices"
