"""Exact-arithmetic toolkit for Kac-Moody root data and their geometry.

Everything is computed over Z, Q, or finite fields F_{p^m}; no floating
point is used anywhere.  The submodules build on each other roughly in
this order:

    exactalg  -- scalars, exact matrices, SNF, rank/kernel
    gcm       -- generalized Cartan matrices, realisations, type reports
    weyl      -- Weyl group elements, real roots, spherical subsets
    kmalg     -- height-truncated Kac-Moody Lie algebras over Z / Q / F_q
    adrep     -- adjoint operators, over-restricted predicate, group checks
    davis     -- building balls and Davis complexes
    cosheaf   -- simplicial complexes, coefficient systems, homology
    cli       -- command line front end
"""

from kmkit.errors import (
    InputError,
    WindowExceededError,
    PropertyViolationError,
    UnsupportedConfigurationError,
    IntegralityDefect,
)

__version__ = "0.1.0"

__all__ = [
    "InputError",
    "WindowExceededError",
    "PropertyViolationError",
    "UnsupportedConfigurationError",
    "IntegralityDefect",
    "__version__",
]
