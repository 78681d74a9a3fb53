"""Complex banded matrices and the forward recurrence for their
polynomial solution systems.

A matrix here is semi-infinite with band half-width N: entries g[n, j]
vanish for |n - j| > N, every entry is bounded by a constant, and the
two extreme diagonals g[k, k+N] and g[l-N, l] never vanish.  Two kinds
of matrices get special treatment:

* case "A": complex symmetric (g[m, n] == g[n, m]);
* case "B": unit upper extreme diagonal (g[k, k+N] == 1), which makes
  the solution polynomials monic.

Rows are materialized lazily from diagonal generators, so only the rows
a computation actually touches ever exist.
"""

import cmath
import json
from dataclasses import dataclass, field

import numpy as np

from .polynomials import Poly

EXTREME_DIAGONAL_FLOOR = 1e-12


class DegenerateMatrixError(ValueError):
    """An extreme-diagonal entry is numerically zero."""


def _as_complex(value):
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    return complex(value)


class BandedMatrix:
    """Semi-infinite (2N+1)-diagonal complex matrix.

    ``diagonals`` maps an offset o in [-N, N] to one of:

    * a complex constant (the whole diagonal),
    * a sequence of entries, indexed from the top of the diagonal
      (entry i is g[i + max(0, -o), i + max(0, o)]),
    * a callable i -> complex with the same indexing.

    ``rows`` optionally overrides entries row by row: rows[n] lists the
    2N+1 values g[n, n-N] .. g[n, n+N] (out-of-matrix positions are
    ignored).  Offsets not listed are zero.
    """

    def __init__(self, N, diagonals=None, rows=None, bound=None, label=""):
        if N < 1:
            raise ValueError("band half-width N must be at least 1")
        self.N = int(N)
        self.bound = float(bound) if bound is not None else None
        self.label = label
        self._diagonals = {}
        self._generated = False
        for off, spec in (diagonals or {}).items():
            off = int(off)
            if abs(off) > self.N:
                raise ValueError(f"diagonal offset {off} outside band of half-width {N}")
            if callable(spec):
                self._diagonals[off] = spec
                self._generated = True
            elif isinstance(spec, (list, tuple, np.ndarray)):
                self._diagonals[off] = [_as_complex(v) for v in spec]
            else:
                self._diagonals[off] = _as_complex(spec)
                self._generated = True
        self._rows = None
        if rows is not None:
            self._rows = [[_as_complex(v) for v in row] for row in rows]
            for n, row in enumerate(self._rows):
                if len(row) != 2 * self.N + 1:
                    raise ValueError(
                        f"explicit row {n} must list {2 * self.N + 1} entries"
                    )

    # -- construction helpers ------------------------------------------------

    @classmethod
    def free_jacobi(cls):
        """Tridiagonal matrix with unit off-diagonals and zero diagonal."""
        return cls(1, diagonals={-1: 1.0, 1: 1.0}, bound=2.0, label="free-jacobi")

    @classmethod
    def rank_one_jacobi(cls, c):
        """Free Jacobi matrix with the (0, 0) entry replaced by c."""
        c = complex(c)
        return cls(
            1,
            diagonals={-1: 1.0, 1: 1.0, 0: lambda k, c=c: c if k == 0 else 0j},
            bound=max(2.0, abs(c) + 1.0),
            label="rank-one-jacobi",
        )

    @classmethod
    def from_spec(cls, spec):
        """Build from the JSON-shaped matrix description (see file format)."""
        N = int(spec["N"])
        diagonals = {}
        for key, val in (spec.get("diagonals") or {}).items():
            off = int(key)
            if isinstance(val, dict) and "const" in val:
                diagonals[off] = _as_complex(val["const"])
            else:
                diagonals[off] = [_as_complex(v) for v in val]
        rows = spec.get("rows")
        return cls(
            N,
            diagonals=diagonals,
            rows=rows,
            bound=spec.get("bound"),
            label=spec.get("label", ""),
        )

    @classmethod
    def from_file(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            spec = json.load(fh)
        return cls.from_spec(spec)

    @property
    def case_hint(self):
        return None

    @property
    def has_generated_entries(self):
        """True when some diagonal comes from a constant or callable."""
        return self._generated

    # -- entry access ---------------------------------------------------------

    def entry(self, n, j):
        if n < 0 or j < 0 or abs(n - j) > self.N:
            return 0j
        if self._rows is not None and n < len(self._rows):
            return self._rows[n][j - n + self.N]
        off = j - n
        spec = self._diagonals.get(off)
        if spec is None:
            return 0j
        i = min(n, j)
        if callable(spec):
            return complex(spec(i))
        if isinstance(spec, list):
            if i >= len(spec):
                raise ValueError(
                    f"diagonal {off} provides {len(spec)} entries; row {n} needs more"
                )
            return spec[i]
        return spec

    def row(self, n):
        """Band slice of row n: entries g[n, j] for j = n-N .. n+N."""
        return np.array(
            [self.entry(n, j) for j in range(n - self.N, n + self.N + 1)],
            dtype=np.complex128,
        )

    def to_spec(self, rows):
        """Materialize ``rows`` rows into the JSON-shaped description."""
        out_rows = []
        for n in range(rows):
            out_rows.append(
                [[self.entry(n, j).real, self.entry(n, j).imag]
                 for j in range(n - self.N, n + self.N + 1)]
            )
        spec = {"N": self.N, "rows": out_rows}
        if self.bound is not None:
            spec["bound"] = self.bound
        if self.label:
            spec["label"] = self.label
        return spec


@dataclass
class ValidationReport:
    case: str
    rows_checked: int
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return {
            "case": self.case,
            "rows_checked": self.rows_checked,
            "ok": self.ok,
            "violations": list(self.violations),
            "notes": list(self.notes),
        }


def validate(matrix, case, rows=32):
    """Check the structural conditions on the first ``rows`` rows.

    Report-style: every violation becomes one message, an empty list
    means the materialized part of the matrix is admissible for the
    requested case.
    """
    if case not in ("A", "B"):
        raise ValueError("case must be 'A' or 'B'")
    rep = ValidationReport(case=case, rows_checked=rows)
    N = matrix.N
    for n in range(rows):
        for j in range(max(0, n - N), n + N + 1):
            g = matrix.entry(n, j)
            if matrix.bound is not None and abs(g) >= matrix.bound:
                rep.violations.append(
                    f"entry ({n},{j}) magnitude {abs(g):.6g} exceeds bound {matrix.bound:g}"
                )
        gup = matrix.entry(n, n + N)
        if abs(gup) <= EXTREME_DIAGONAL_FLOOR:
            rep.violations.append(f"extreme diagonal vanishes at k={n} (upper)")
        if n >= N:
            gdn = matrix.entry(n, n - N)
            if abs(gdn) <= EXTREME_DIAGONAL_FLOOR:
                rep.violations.append(f"extreme diagonal vanishes at l={n} (lower)")
        if case == "A":
            for j in range(n + 1, min(n + N, rows - 1) + 1):
                a, b = matrix.entry(n, j), matrix.entry(j, n)
                if abs(a - b) > 1e-12 * max(1.0, abs(a), abs(b)):
                    rep.violations.append(f"not symmetric at ({n},{j})")
        if case == "B" and abs(gup - 1.0) > 1e-12:
            rep.violations.append(f"upper extreme diagonal not 1 at k={n}")
    if matrix.has_generated_entries:
        rep.notes.append(
            "matrix has generated diagonals; the global magnitude bound is an "
            "unchecked hypothesis beyond the materialized rows"
        )
    return rep


@dataclass
class PolynomialSystem:
    """Solution polynomials p_0 .. p_K of the difference equation.

    p_j is the monomial of degree j for j < N, and row n determines
    p_{n+N} through

        g[n, n+N] p_{n+N} = x^N p_n - sum_{j=n-N}^{n+N-1} g[n, j] p_j.

    ``leading`` tracks the leading coefficients; in case B they are all
    exactly 1.
    """

    N: int
    case: str
    polys: list
    leading: np.ndarray

    @property
    def K(self):
        return len(self.polys) - 1

    def coefficient_matrix(self, size=None):
        """Upper-triangular T with T[d, r] = coefficient of x^d in p_r."""
        size = self.K + 1 if size is None else size
        if size > self.K + 1:
            raise ValueError("system does not reach the requested degree")
        T = np.zeros((size, size), dtype=np.complex128)
        for r in range(size):
            T[: r + 1, r] = self.polys[r].coeffs
        return T


def solve_polynomials(matrix, case, count):
    """Generate the polynomial system p_0 .. p_count by forward recurrence.

    Requires rows 0 .. count-N of the matrix.  Raises
    DegenerateMatrixError when an upper extreme-diagonal entry is
    numerically zero, since the recurrence divides by it.
    """
    if case not in ("A", "B"):
        raise ValueError("case must be 'A' or 'B'")
    N = matrix.N
    if count < N:
        polys = [Poly.monomial(j) for j in range(count + 1)]
        return PolynomialSystem(N, case, polys, np.ones(count + 1, dtype=np.complex128))
    coeffs = [np.zeros(j + 1, dtype=np.complex128) for j in range(N)]
    for j in range(N):
        coeffs[j][j] = 1.0
    leading = [1.0 + 0j] * N
    for n in range(0, count - N + 1):
        gup = matrix.entry(n, n + N)
        if abs(gup) <= EXTREME_DIAGONAL_FLOOR:
            raise DegenerateMatrixError(
                f"upper extreme diagonal entry ({n},{n + N}) is numerically zero"
            )
        acc = np.zeros(n + N + 1, dtype=np.complex128)
        acc[N : N + n + 1] += coeffs[n]
        for j in range(max(0, n - N), n + N):
            g = matrix.entry(n, j)
            if g != 0:
                acc[: j + 1] -= g * coeffs[j]
        if gup != 1.0:
            acc /= gup
        coeffs.append(acc)
        leading.append(leading[n] / gup if gup != 1.0 else leading[n])
    polys = [Poly(c) for c in coeffs]
    lead = np.array(leading, dtype=np.complex128)
    if case == "B" and not np.all(lead == 1.0):
        # unit upper diagonal forces monic solutions; reaching this means
        # the matrix should have been rejected by validate()
        raise DegenerateMatrixError("case B system is not monic")
    return PolynomialSystem(N, case, polys, lead)


def recurrence_residual(matrix, system, sample_points=None, rng_seed=7):
    """Max residual of the defining recurrence at sample points.

    For every usable row n checks
    |sum_j g[n, j] p_j(x) - x^N p_n(x)| <= scale, with the residual
    normalized by max(1, |x|^(n+N)).
    """
    N = matrix.N
    if sample_points is None:
        rng = np.random.default_rng(rng_seed)
        pts = 2 * rng.random(20) * np.exp(2j * np.pi * rng.random(20))
    else:
        pts = np.asarray(sample_points, dtype=np.complex128)
    worst = 0.0
    for n in range(0, system.K - N + 1):
        vals = np.zeros(len(pts), dtype=np.complex128)
        for j in range(max(0, n - N), n + N + 1):
            g = matrix.entry(n, j)
            if g != 0:
                vals += g * system.polys[j](pts)
        vals -= pts**N * system.polys[n](pts)
        scale = np.maximum(1.0, np.abs(pts) ** (n + N))
        worst = max(worst, float(np.max(np.abs(vals) / scale)))
    return worst
