"""Numerical verification lab for multiscale affine approximation of
elliptic solutions on the upper half-space.

Library layout:

- :mod:`carleson.geometry` - grids, regions, dyadic sampling nets
- :mod:`carleson.profiles` - piecewise-polynomial 1-D profiles, exact quadrature
- :mod:`carleson.coefficients` - coefficient fields and oscillation numbers
- :mod:`carleson.solver` - conservative finite differences and Krylov solves
- :mod:`carleson.functionals` - slope / energy / non-affine-energy functionals
- :mod:`carleson.norms` - Carleson norms of multiscale samples, Hardy check
- :mod:`carleson.oracles` - closed-form counterexample family and test solutions
- :mod:`carleson.scenarios` - reproducible experiment pipelines
- :mod:`carleson.cli` - the `carleson` command-line entry point
"""

__version__ = "0.1.0"
