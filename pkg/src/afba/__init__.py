"""Asymmetric forward-backward-adjoint splitting for monotone inclusions.

Modules
-------
linops
    Dense-realizable linear operators and spectral helpers.
atoms
    Proximable functions, cocoercive maps, block-separable operators.
engine
    The generic iteration over ``(A, M, C)`` and ``(H, P, K, S)``.
primal_dual
    Primal-dual instances, parameter mathematics and validation.
variants
    Named algorithm presets.
diagnostics
    Fejér, rate and linear-convergence monitors.
problems
    Seeded test problems with oracle solutions.
cli
    Command-line front end.
"""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
