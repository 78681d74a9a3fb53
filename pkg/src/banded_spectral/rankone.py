"""Rank-one perturbation of the free Jacobi matrix: closed-form
solutions, moments, analytic Laurent weight, and circle weights.

The matrix has c in the top-left corner and units on both off-diagonals.
Its solution polynomials are p_n = u_n - c u_{n-1} with u_n the scaled
Chebyshev polynomials of the second kind (u_n(x) = U_n(x/2)).  The
moment functional has closed-form values s_n, and the solutions are
orthonormal against the analytic weight

    w(z) = sum_{n>=1} n c^{n-1} z^{-n} phi_n(z),
    phi_n(z) = sum_{m>=0} (2m+n-1)! / (m! (m+n)!) z^{-2m},

on every circle |z| = R > R0 = max(2, 2|c|).  Adding the reflected
correction g (analytic on a disk that contains the circle) produces a
weight p(theta) that is real and nonnegative for suitable radii, turning
the complex orthogonality into one against a genuine positive weight.

Series truncation is driven by the coefficient bound
(2m+n-1)!/(m!(m+n)!) <= 2^n 4^m / n and the geometric envelope
C1 (R0/|z|)^n with C1 = |z|^2 / (|c| (|z|^2 - 4)); both leave geometric
tails that are summed into the stopping rule, so truncation indices are
deterministic functions of |z| and the tolerance.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._xprec import CLD, LD, TWO_PI, circle_nodes, horner
from .polynomials import Poly

MOMENT_INDEX_CAP = 160
DOMAIN_GUARD = 1.0 + 1e-9


@dataclass(frozen=True)
class RankOneModel:
    """Perturbation parameter plus the radii derived from it."""

    c: complex
    series_tol: float = 1e-14
    alpha: float = None

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))
        if self.series_tol <= 0:
            raise ValueError("series tolerance must be positive")
        if self.alpha is not None and self.alpha <= self.R0:
            raise ValueError(f"alpha must exceed R0 = {self.R0}")

    @property
    def R0(self):
        return max(2.0, 2.0 * abs(self.c))

    @property
    def R1(self):
        if self.alpha is None:
            raise ValueError("model carries no evaluation radius alpha")
        return self.alpha**2 / self.R0


# ---------------------------------------------------------------------------
# Chebyshev-form solutions and basis changes
# ---------------------------------------------------------------------------

_U_CACHE = [Poly([1.0]), Poly([0.0, 1.0])]


def chebyshev_u(n):
    """Scaled Chebyshev polynomial of the second kind, u_n(x) = U_n(x/2).

    Three-term recurrence u_{n+1} = x u_n - u_{n-1}; coefficients stay
    exact integers in double precision for every degree used here.
    """
    if n < 0:
        return Poly.zero()
    while len(_U_CACHE) <= n:
        k = len(_U_CACHE)
        _U_CACHE.append(Poly.monomial(1) * _U_CACHE[k - 1] - _U_CACHE[k - 2])
    return _U_CACHE[n]


def solution_poly(model, n):
    """Closed form p_n = u_n - c u_{n-1} of the perturbed recurrence."""
    return chebyshev_u(n) - model.c * chebyshev_u(n - 1)


def cheb_in_solution_basis(model, n):
    """Expansion u_n = sum_j c^(n-j) p_j, returned as the coefficient row."""
    return model.c ** np.arange(n, -1, -1, dtype=np.complex128)


def monomial_in_cheb(n):
    """Weights expressing x^n in the u-basis (parity-mismatched slots zero).

    Even degrees 2k load u_{2j} with (2j+1) C(2k, k-j) / (k+j+1); odd
    degrees 2k-1 load u_{2j-1} with 2j C(2k-1, k-j) / (k+j).  Exact
    integer combinatorics, divided in one step.
    """
    out = np.zeros(n + 1)
    if n % 2 == 0:
        k = n // 2
        for j in range(k + 1):
            out[2 * j] = (2 * j + 1) * math.comb(2 * k, k - j) / (k + j + 1)
    else:
        k = (n + 1) // 2
        for j in range(1, k + 1):
            out[2 * j - 1] = 2 * j * math.comb(2 * k - 1, k - j) / (k + j)
    return out


def moment(model, n):
    """Closed-form moment s_n of the spectral functional.

    s_2k = sum_j (2j+1) C(2k, k-j) / (k+j+1) c^(2j) and the odd analogue.
    Indices above 160 overflow the combinatorial factors in binary
    floating point and are rejected.
    """
    if n < 0:
        raise ValueError("moment index must be nonnegative")
    if n > MOMENT_INDEX_CAP:
        raise ValueError(f"moment index {n} above supported range {MOMENT_INDEX_CAP}")
    c = CLD(model.c)
    acc = CLD(0.0)
    if n % 2 == 0:
        k = n // 2
        for j in range(k + 1):
            w = LD(math.comb(2 * k, k - j) * (2 * j + 1)) / LD(k + j + 1)
            acc += w * c ** (2 * j)
    else:
        k = (n + 1) // 2
        for j in range(1, k + 1):
            w = LD(math.comb(2 * k - 1, k - j) * 2 * j) / LD(k + j)
            acc += w * c ** (2 * j - 1)
    return complex(acc)


def _moments_ld(model, count):
    """First ``count`` moments as a clongdouble vector."""
    return np.array([moment(model, n) for n in range(count)], dtype=CLD)


# ---------------------------------------------------------------------------
# phi_n: series and hypergeometric closed form
# ---------------------------------------------------------------------------


def _phi_m_stop(n, z_abs, tol):
    """Terms needed so the bound (2^n / n) x^m / (1 - x), x = 4/|z|^2,
    falls below tol."""
    x = 4.0 / z_abs**2
    if x >= 1.0:
        raise ValueError("phi series needs |z| > 2")
    lead = 2.0**n / n / (1.0 - x)
    if lead <= tol:
        return 1
    m = int(math.ceil(math.log(tol / lead) / math.log(x)))
    if m > 200_000:
        raise ValueError("requested tolerance unreachable this close to |z| = 2")
    return max(m, 1)


def phi_series(model, n, z, tol=None):
    """phi_n(z) by its defining series; needs |z| > R0 strictly."""
    if n < 1:
        raise ValueError("phi index starts at 1")
    tol = model.series_tol if tol is None else tol
    z = complex(z)
    if abs(z) < model.R0 * DOMAIN_GUARD:
        raise ValueError(f"|z| = {abs(z):.6g} not above R0 = {model.R0:g}")
    m_stop = _phi_m_stop(n, abs(z), tol)
    return complex(_accel.phi_grid(n, np.array([z]), m_stop)[0])


def phi_hypergeometric(model, n, z):
    """phi_n via the Gauss-series closed form
    a_n F(n/2, (n+1)/2; n+1; 4/z^2); needs |z| > 2."""
    if n < 1:
        raise ValueError("phi index starts at 1")
    z = complex(z)
    if abs(z) <= 2.0:
        raise ValueError(f"|z| = {abs(z):.6g} not above 2")
    x = 4.0 / z**2
    # a_n = 2^(n-1)/n! * [(n-1)/2]! * (1/2)_[n/2]
    half_poch = 1.0
    for i in range((n // 2)):
        half_poch *= 0.5 + i
    a_n = 2.0 ** (n - 1) / math.factorial(n) * math.factorial((n - 1) // 2) * half_poch
    a, b, cc = n / 2.0, (n + 1) / 2.0, float(n + 1)
    term = 1.0 + 0j
    acc = term
    for m in range(100_000):
        term = term * (a + m) * (b + m) / ((cc + m) * (m + 1)) * x
        acc += term
        if abs(term) <= 1e-18 * (1.0 + abs(acc)):
            break
    else:
        raise RuntimeError("hypergeometric series did not converge")
    return a_n * acc


# ---------------------------------------------------------------------------
# analytic Laurent weight w and helpers
# ---------------------------------------------------------------------------


def _weight_truncation(model, z_abs, tol):
    """(n_stop, m_stops) for the double series of w at |z| = z_abs."""
    if z_abs < model.R0 * DOMAIN_GUARD:
        raise ValueError(f"|z| = {z_abs:.6g} not above R0 = {model.R0:g}")
    c_abs = abs(model.c)
    if c_abs == 0.0:
        n_stop = 1
    else:
        q = model.R0 / z_abs
        c1 = z_abs**2 / (c_abs * (z_abs**2 - 4.0))
        if c1 * q / (1.0 - q) <= tol:
            n_stop = 1
        else:
            n_stop = int(math.ceil(math.log(tol * (1.0 - q) / c1) / math.log(q)))
            n_stop = max(n_stop, 1)
        if n_stop > 100_000:
            raise ValueError("requested tolerance unreachable this close to R0")
    m_stops = np.array(
        [_phi_m_stop(n, z_abs, tol / 8.0) for n in range(1, n_stop + 1)], dtype=np.int64
    )
    return n_stop, m_stops


def weight_w(model, z, tol=None):
    """Analytic weight w(z); converges for |z| > R0 (enforced strictly).

    With c = 0 only the n = 1 term survives and w = phi_1(z) / z.
    """
    tol = model.series_tol if tol is None else tol
    z = complex(z)
    n_stop, m_stops = _weight_truncation(model, abs(z), tol)
    return complex(_accel.weight_grid(model.c, np.array([z]), n_stop, m_stops)[0])


def weight_w_grid(model, z, tol=None):
    """Vectorized w on an array of points (complex128 fast path)."""
    z = np.asarray(z, dtype=np.complex128)
    tol = model.series_tol if tol is None else tol
    n_stop, m_stops = _weight_truncation(model, float(np.min(np.abs(z))), tol)
    return _accel.weight_grid(model.c, z.ravel(), n_stop, m_stops).reshape(z.shape)


def _laurent_coefficients_of_w(model, z_abs, tol):
    """Coefficients C_k of the truncated w(z) = sum_k C_k z^{-k}.

    Reorganizes the (n, m) double series by total inverse power
    k = n + 2m; the truncation set is exactly the one the stopping rule
    prescribes, only the summation order changes.
    """
    n_stop, m_stops = _weight_truncation(model, z_abs, tol)
    k_max = max(n + 2 * int(m_stops[n - 1]) for n in range(1, n_stop + 1))
    coeffs = np.zeros(k_max + 1, dtype=CLD)
    c = CLD(model.c)
    pref = CLD(1.0)  # c^{n-1} at n = 1
    for n in range(1, n_stop + 1):
        ratio = CLD(1.0) / LD(n)  # (2m+n-1)!/(m!(m+n)!) at m = 0
        coeffs[n] += LD(n) * pref * ratio
        for m in range(int(m_stops[n - 1])):
            ratio = ratio * LD((2 * m + n) * (2 * m + n + 1)) / LD((m + 1) * (m + n + 1))
            coeffs[n + 2 * (m + 1)] += LD(n) * pref * ratio
        pref = pref * c
    return coeffs


def _w_samples_ld(model, radius, count, tol=None):
    """Extended-precision w on the uniform circle grid."""
    tol = model.series_tol if tol is None else tol
    coeffs = _laurent_coefficients_of_w(model, float(radius), tol)
    _, z, _ = circle_nodes(radius, count)
    zi = 1.0 / z
    # w = sum_{k>=1} C_k z^{-k}
    return horner(coeffs[1:], zi) * zi


# ---------------------------------------------------------------------------
# correction weight g and the combined circle weight p
# ---------------------------------------------------------------------------


def _g_truncation(model, z_abs, R, tol):
    q = model.R0 * z_abs / R**2
    if q >= 1.0 / DOMAIN_GUARD:
        raise ValueError(
            f"|z| = {z_abs:.6g} not inside the disk of radius R^2/R0 = "
            f"{R**2 / model.R0:.6g}"
        )
    # |s_{j+1}| <= R0^{j+1}, so terms are below R0 q^j and the tail is
    # geometric with ratio q
    if model.R0 * q / (1.0 - q) <= tol:
        terms = 1
    else:
        terms = int(math.ceil(math.log(tol * (1.0 - q) / model.R0) / math.log(q))) + 1
    if terms > MOMENT_INDEX_CAP:
        raise ValueError(
            "correction series needs moments beyond the supported range; "
            "increase the radius or loosen the tolerance"
        )
    return terms


def _g_coefficients(model, R, terms):
    """Series coefficients of g against the argument z/R^2, clongdouble."""
    s = _moments_ld(model, terms + 1)
    return np.conj(s[1:]) / LD(R) ** 2


def weight_g(model, z, R, tol=None):
    """Correction weight g(z) = R^{-2} sum_j conj(s_{j+1}) (z/R^2)^j.

    Analytic on |z| < R^2 / R0 (enforced strictly); adding it to w does
    not change any contour integral of a polynomial over |z| = R.
    """
    tol = model.series_tol if tol is None else tol
    z = complex(z)
    terms = _g_truncation(model, abs(z), R, tol)
    coeffs = _g_coefficients(model, R, terms)
    return complex(horner(coeffs, CLD(z) / LD(R) ** 2))


def _g_samples_ld(model, R, count, tol=None):
    """Extended-precision g on the uniform circle grid of radius R."""
    tol = model.series_tol if tol is None else tol
    terms = _g_truncation(model, R, R, tol)
    coeffs = _g_coefficients(model, R, terms)
    _, z, _ = circle_nodes(R, count)
    return horner(coeffs, z / LD(R) ** 2)


def reflected_weight(model, u, tol=None):
    """The reflection u^{-2} conj(w(conj(1/u))) - 1/u, defined for
    |u| < 1/R0; g(z) equals R^{-2} times this at u = z/R^2."""
    u = complex(u)
    if abs(u) >= 1.0 / (model.R0 * DOMAIN_GUARD):
        raise ValueError("reflection argument must satisfy |u| < 1/R0")
    w_val = weight_w(model, np.conj(1.0 / u), tol)
    return np.conj(w_val) / u**2 - 1.0 / u


def circle_weight(model, alpha, theta):
    """Combined circle weight p(theta) = (w + g)(alpha e^{i theta})
    alpha e^{i theta} / 2pi, with R = alpha inside g.

    Returned as a complex number: its reality is a conclusion to be
    checked, not an assumption baked into the return type.
    """
    if alpha <= model.R0:
        raise ValueError(f"alpha must exceed R0 = {model.R0:g}")
    z = alpha * complex(math.cos(theta), math.sin(theta))
    val = weight_w(model, z) + weight_g(model, z, alpha)
    return val * z / (2 * np.pi)


def circle_weight_grid(model, alpha, count, tol=None):
    """p(theta) on the uniform grid (complex128 fast path for scans)."""
    if alpha <= model.R0:
        raise ValueError(f"alpha must exceed R0 = {model.R0:g}")
    tol = model.series_tol if tol is None else tol
    theta = 2 * np.pi * np.arange(count) / count
    z = alpha * np.exp(1j * theta)
    w = weight_w_grid(model, z, tol)
    terms = _g_truncation(model, alpha, alpha, tol)
    coeffs = _g_coefficients(model, alpha, terms).astype(np.complex128)
    g = horner(coeffs, z / alpha**2)
    return theta, (w + g) * z / (2 * np.pi)


# ---------------------------------------------------------------------------
# contour quadrature reports
# ---------------------------------------------------------------------------


def _solution_values_ld(model, z, n_max):
    """p_0 .. p_{n_max} on a node array via the defining recurrence."""
    P = np.empty((n_max + 1, z.shape[0]), dtype=CLD)
    P[0] = 1.0
    if n_max >= 1:
        P[1] = z - CLD(model.c)
    for n in range(1, n_max):
        P[n + 1] = z * P[n] - P[n - 1]
    return P


@dataclass
class ContourReport:
    """Residuals of (2 pi i)^{-1} oint p_n p_m w dz = delta."""

    radius: float
    nodes: int
    n_max: int
    residuals: dict = field(default_factory=dict)

    @property
    def max_abs_residual(self):
        return max((abs(r) for r in self.residuals.values()), default=0.0)

    def to_dict(self):
        return {
            "relation": "contour-orthonormality",
            "radius": self.radius,
            "nodes": self.nodes,
            "n_max": self.n_max,
            "max_abs_residual": self.max_abs_residual,
            "residuals": [
                {"n": n, "m": m, "re": r.real, "im": r.imag, "abs": abs(r)}
                for (n, m), r in sorted(self.residuals.items())
            ],
        }


def contour_orthogonality(model, R, n_max, nodes=8192, tol=None):
    """Trapezoid check of the contour orthonormality on |z| = R > R0."""
    if R <= model.R0:
        raise ValueError(f"R must exceed R0 = {model.R0:g}")
    _, z, _ = circle_nodes(R, nodes)
    w = _w_samples_ld(model, R, nodes, tol)
    P = _solution_values_ld(model, z, n_max)
    base = w * z
    report = ContourReport(radius=float(R), nodes=nodes, n_max=n_max)
    for n in range(n_max + 1):
        for m in range(n + 1):
            val = complex((P[n] * P[m] * base).sum() / nodes)
            report.residuals[(n, m)] = val - (1.0 if n == m else 0.0)
    return report


def laurent_coefficients(model, R, k_max, nodes=8192, tol=None):
    """Contour-extracted Laurent data of w on |z| = R.

    Returns (negative, nonnegative): negative[k] is the coefficient at
    index -k-1 (expected to match the moment s_k), nonnegative[k] the
    coefficient at index k (expected zero).
    """
    if R <= model.R0:
        raise ValueError(f"R must exceed R0 = {model.R0:g}")
    _, z, _ = circle_nodes(R, nodes)
    w = _w_samples_ld(model, R, nodes, tol)
    negative = np.empty(k_max + 1, dtype=np.complex128)
    nonnegative = np.empty(k_max + 1, dtype=np.complex128)
    zpow = np.ones_like(z)
    for k in range(k_max + 1):
        # coefficient at index n: (1/M) sum z^{-n} w; here n = -(k+1) and n = k
        negative[k] = complex((zpow * z * w).sum() / nodes)
        nonnegative[k] = complex((w / (zpow * z)).sum() / nodes)
        zpow = zpow * z
    return negative, nonnegative


def combined_contour_moments(model, alpha, indices, nodes=8192, tol=None):
    """(2 pi i)^{-1} oint z^n (w + g) dz for the given integer indices.

    For n < 0 the exact value is alpha^(2n) conj(s_{-n}).
    """
    if alpha <= model.R0:
        raise ValueError(f"alpha must exceed R0 = {model.R0:g}")
    _, z, _ = circle_nodes(alpha, nodes)
    f = (_w_samples_ld(model, alpha, nodes, tol) + _g_samples_ld(model, alpha, nodes, tol)) * z
    out = {}
    for n in indices:
        out[n] = complex((f * z ** int(n)).sum() / nodes)
    return out


@dataclass
class ScanRow:
    alpha: float
    min_real_p: float
    max_abs_imag_p: float
    orthogonality_residual: float
    nonnegative: bool
    pair_residuals: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "min_real_p": self.min_real_p,
            "max_abs_imag_p": self.max_abs_imag_p,
            "orthogonality_residual": self.orthogonality_residual,
            "nonnegative": self.nonnegative,
        }


@dataclass
class ScanReport:
    grid: int
    n_max: int
    rows: list = field(default_factory=list)

    @property
    def any_nonnegative(self):
        return any(r.nonnegative for r in self.rows)

    def to_dict(self):
        return {
            "relation": "positive-weight-orthonormality",
            "grid": self.grid,
            "n_max": self.n_max,
            "any_nonnegative": self.any_nonnegative,
            "rows": [r.to_dict() for r in self.rows],
        }


def alpha_scan(model, alphas, grid=2048, n_max=8, neg_tol=1e-8):
    """Scan candidate radii for reality and nonnegativity of p(theta).

    For each alpha the report records the extreme real part and
    imaginary magnitude of p over the theta grid and the worst residual
    of int p_n p_m p(theta) dtheta against delta for n, m <= n_max.
    Which radii come out nonnegative is reported, never asserted: only
    the existence of one good radius is guaranteed.
    """
    report = ScanReport(grid=grid, n_max=n_max)
    for alpha in alphas:
        alpha = float(alpha)
        theta, p = circle_weight_grid(model, alpha, grid)
        z = alpha * np.exp(1j * theta)
        P = np.empty((n_max + 1, grid), dtype=np.complex128)
        P[0] = 1.0
        if n_max >= 1:
            P[1] = z - model.c
        for n in range(1, n_max):
            P[n + 1] = z * P[n] - P[n - 1]
        pair_residuals = {}
        base = p * (2 * np.pi / grid)
        for n in range(n_max + 1):
            for m in range(n + 1):
                val = complex((P[n] * P[m] * base).sum())
                pair_residuals[(n, m)] = abs(val - (1.0 if n == m else 0.0))
        min_real = float(np.min(p.real))
        max_imag = float(np.max(np.abs(p.imag)))
        report.rows.append(
            ScanRow(
                alpha=alpha,
                min_real_p=min_real,
                max_abs_imag_p=max_imag,
                orthogonality_residual=max(pair_residuals.values()),
                nonnegative=min_real >= -neg_tol,
                pair_residuals=pair_residuals,
            )
        )
    return report
