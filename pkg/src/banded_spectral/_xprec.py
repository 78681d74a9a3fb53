"""Extended-precision helpers shared by the quadrature and table routines.

The orthogonality residuals certified by this package are tiny numbers
obtained by massive cancellation: the integrands and moment sums reach
1e10 while the results are O(1).  Plain double precision leaves a
coherent error floor of roughly 5e-17 times the largest intermediate,
which is not enough for the certification thresholds.  All assembly and
quadrature accumulations therefore run in numpy's clongdouble (80-bit
extended on x86), with complex128 in- and outputs.
"""

import numpy as np

LD = np.longdouble
CLD = np.clongdouble

# full-precision pi; np.pi is a double and its rounding error is visible
# at the tolerances certified here
PI = np.arccos(LD(-1.0))
TWO_PI = LD(2) * PI

EPS_LD = float(np.finfo(LD).eps)


def circle_nodes(radius, count):
    """Uniform nodes r*exp(i theta_j), theta_j = 2 pi j / count, in clongdouble.

    Returns (theta, z, phase_conj) where phase_conj = exp(-i theta).
    """
    theta = TWO_PI * np.arange(count, dtype=LD) / LD(count)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    z = LD(radius) * (cos_t + CLD(1j) * sin_t)
    phase_conj = cos_t - CLD(1j) * sin_t
    return theta, z, phase_conj


def horner(coeffs, z):
    """Evaluate a dense low-to-high coefficient sequence at z (array ok).

    Runs in whatever precision numpy promotes coeffs and z to.
    """
    if len(coeffs) == 0:
        return np.zeros_like(z)
    acc = np.full_like(z, coeffs[-1])
    for k in range(len(coeffs) - 2, -1, -1):
        acc = acc * z + coeffs[k]
    return acc
