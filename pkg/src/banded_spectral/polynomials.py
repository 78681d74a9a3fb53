"""Dense complex polynomials and the residue-class split used in pairings.

Coefficients are stored low-to-high degree in complex128.  Normalization
removes trailing entries only when they are exactly zero (below 1e-300
in magnitude); floating-point noise is never stripped, so degrees stay
deterministic for the triangular solves downstream.
"""

import numpy as np

from ._xprec import horner

ZERO_CUTOFF = 1e-300


class Poly:
    """Immutable dense polynomial over complex scalars."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=np.complex128)).copy()
        if arr.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        keep = arr.size
        while keep > 0 and abs(arr[keep - 1]) < ZERO_CUTOFF:
            keep -= 1
        arr = arr[:keep]
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls):
        return cls([])

    @classmethod
    def one(cls):
        return cls([1.0])

    @classmethod
    def monomial(cls, degree, coeff=1.0):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        c = np.zeros(degree + 1, dtype=np.complex128)
        c[degree] = coeff
        return cls(c)

    # -- structure ---------------------------------------------------------

    @property
    def degree(self):
        """Degree, or None for the zero polynomial."""
        return None if self.coeffs.size == 0 else self.coeffs.size - 1

    @property
    def is_zero(self):
        return self.coeffs.size == 0

    @property
    def leading(self):
        if self.is_zero:
            raise ValueError("zero polynomial has no leading coefficient")
        return complex(self.coeffs[-1])

    def __len__(self):
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs.shape == other.coeffs.shape and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        if self.is_zero:
            return "Poly(0)"
        return f"Poly(degree={self.degree})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return Poly(out)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        n = max(self.coeffs.size, other.coeffs.size)
        out = np.zeros(n, dtype=np.complex128)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] -= other.coeffs
        return Poly(out)

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero or other.is_zero:
                return Poly.zero()
            return Poly(np.convolve(self.coeffs, other.coeffs))
        return Poly(self.coeffs * complex(other))

    def __rmul__(self, other):
        return Poly(self.coeffs * complex(other))

    def __neg__(self):
        return Poly(-self.coeffs)

    def __call__(self, z):
        """Horner evaluation; z may be a scalar or an ndarray."""
        if np.isscalar(z) or np.ndim(z) == 0:
            if self.is_zero:
                return 0j
            acc = complex(self.coeffs[-1])
            zz = complex(z)
            for k in range(self.coeffs.size - 2, -1, -1):
                acc = acc * zz + complex(self.coeffs[k])
            return acc
        z = np.asarray(z)
        if self.is_zero:
            return np.zeros(z.shape, dtype=np.result_type(z.dtype, np.complex128))
        return horner(self.coeffs.astype(np.result_type(z.dtype, np.complex128)), z)


def residue_split(p, modulus, residue):
    """Collect the coefficients of p in one residue class mod ``modulus``.

    The result q satisfies q.coeffs[n] == p.coeffs[n*modulus + residue],
    i.e. p(x) == sum_r x^r q_r(x^modulus) coefficientwise.
    """
    if modulus < 1:
        raise ValueError("modulus must be at least 1")
    if not 0 <= residue < modulus:
        raise ValueError(f"residue {residue} out of range for modulus {modulus}")
    return Poly(p.coeffs[residue::modulus])


def split_row(p, modulus, z):
    """Row vector of the residue-class components of p evaluated at z.

    Component m is residue_split(p, modulus, m) evaluated at z itself
    (plain evaluation, no conjugation).  For a monomial x^(k*modulus+r)
    this is z^k times the r-th standard basis row.
    """
    return np.array([residue_split(p, modulus, m)(z) for m in range(modulus)])


def split_coefficient_rows(p, modulus, width=None):
    """Padded (modulus, width) coefficient matrix of the split components.

    Rows feed the batched Horner kernels; ``width`` defaults to the
    longest component.
    """
    parts = [residue_split(p, modulus, m).coeffs for m in range(modulus)]
    if width is None:
        width = max((c.size for c in parts), default=0)
    width = max(width, 1)
    out = np.zeros((modulus, width), dtype=np.complex128)
    lengths = np.zeros(modulus, dtype=np.int64)
    for m, c in enumerate(parts):
        out[m, : c.size] = c
        lengths[m] = c.size
    return out, lengths
