"""Spectral functionals of banded matrices and their block-Hankel
moment tables.

The solution polynomials {p_n} of a case A matrix are orthonormal under
a bilinear symmetric functional sigma; a case B matrix instead carries a
unique functional under which the (monic) solutions are left-orthogonal.
Both are represented through the scalar moments

    gamma[i, j] = sigma(x^i, x^j),

whose block structure (N x N blocks depending only on the block-index
sum) means the whole table is determined by its first block column
S_0, S_1, ... .  That block column is what gets handed to the circle
measure construction.

Assembly and pairing run in extended precision: the moment sums cancel
catastrophically (intermediates reach 1e10 while results are O(1)), and
double precision cannot certify the residual thresholds downstream.
Public outputs are complex128.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ._xprec import CLD
from .polynomials import Poly

LEADING_COEFF_WARN_RANGE = (1e-8, 1e8)


def _coeff_vector(u):
    if isinstance(u, Poly):
        return u.coeffs
    return Poly(u).coeffs


def _triangular_columns(system, size):
    """Columns of T^{-1} where T is the coefficient matrix of {p_n}.

    Column j holds the expansion coefficients of the monomial x^j in the
    p-basis, obtained by back-substitution.
    """
    if size > system.K + 1:
        raise ValueError(
            f"system reaches degree {system.K}, need degree {size - 1}"
        )
    bad = [
        n
        for n, lead in enumerate(system.leading[:size])
        if not LEADING_COEFF_WARN_RANGE[0] < abs(lead) < LEADING_COEFF_WARN_RANGE[1]
    ]
    if bad:
        warnings.warn(
            f"leading coefficients at degrees {bad[:4]} are badly scaled; "
            "the triangular solve may lose accuracy",
            RuntimeWarning,
            stacklevel=3,
        )
    T = system.coefficient_matrix(size).astype(CLD)
    K = np.zeros((size, size), dtype=CLD)
    for j in range(size):
        x = np.zeros(size, dtype=CLD)
        x[j] = 1.0 / T[j, j]
        for r in range(j - 1, -1, -1):
            x[r] = -(T[r, r + 1 : j + 1] @ x[r + 1 : j + 1]) / T[r, r]
        K[:, j] = x
    return K


def basis_expansion(u, system):
    """Coefficients of u in the solution-polynomial basis.

    Returns c with u == sum_r c[r] * p_r, computed by back-substitution
    against the triangular coefficient matrix.
    """
    a = _coeff_vector(u)
    if a.size == 0:
        return np.zeros(0, dtype=np.complex128)
    if a.size - 1 > system.K:
        raise ValueError(f"degree {a.size - 1} exceeds system degree {system.K}")
    K = _triangular_columns(system, a.size)
    return (K @ a.astype(CLD)).astype(np.complex128)


def spectral_form(u, v, system):
    """Bilinear symmetric form under which a case A system is orthonormal.

    Equals the plain (unconjugated) dot product of the two expansion
    coefficient vectors in the p-basis.
    """
    if system.case != "A":
        raise ValueError("the bilinear spectral form is defined for case A systems")
    cu = basis_expansion(u, system).astype(CLD)
    cv = basis_expansion(v, system).astype(CLD)
    n = min(cu.size, cv.size)
    return complex(cu[:n] @ cv[:n])


@dataclass
class MomentTable:
    """Scalar moments gamma[i, j] stored as the first block column.

    ``blocks``     : (d+1, N, N) complex128, S_k = (gamma[kN+r, s]).
    ``blocks_ld``  : the same data in extended precision, used by the
                     pairing so table noise stays below the residual
                     thresholds it certifies.
    ``assembled``  : for case A, the raw square moment matrix from the
                     gram assembly.  The block column is a copy of its
                     first N columns, so comparing assembled values
                     across the block structure is a real consistency
                     check, not a tautology.
    """

    N: int
    case: str
    blocks: np.ndarray
    blocks_ld: np.ndarray
    assembled: np.ndarray = None

    @property
    def d(self):
        return self.blocks.shape[0] - 1

    @property
    def max_index(self):
        """Largest scalar row index i for which gamma(i, j<N) is stored."""
        return (self.d + 1) * self.N - 1

    def gamma(self, i, j):
        """Scalar moment via the block-Hankel shift gamma[kN+r, lN+s] = S_{k+l}[r, s]."""
        k, r = divmod(i, self.N)
        l, s = divmod(j, self.N)
        if k + l > self.d:
            raise ValueError(f"moment ({i},{j}) outside table extent d={self.d}")
        return complex(self.blocks[k + l][r, s])

    def gamma_matrix(self, imax, jmax, ld=False):
        """Dense (imax+1, jmax+1) moment matrix read through the blocks."""
        src = self.blocks_ld if ld else self.blocks
        kk, rr = np.divmod(np.arange(imax + 1), self.N)
        ll, ss = np.divmod(np.arange(jmax + 1), self.N)
        if kk[-1] + ll[-1] > self.d:
            raise ValueError(
                f"moments up to ({imax},{jmax}) exceed table extent d={self.d}"
            )
        return src[kk[:, None] + ll[None, :], rr[:, None], ss[None, :]]

    def first_block_column(self):
        """First block column as a list of N x N complex matrices."""
        return [np.array(S) for S in self.blocks]


def default_block_count(K, N):
    """Table extent covering every pairing of polynomials up to degree K."""
    return int(np.ceil(2 * K / N)) + 1


def _largest_fitting_d(system):
    """Largest block count whose monomial demand the system satisfies."""
    d = (system.K + 1) // system.N - 1
    if d < 0:
        raise ValueError("system too short to assemble any moment block")
    return d


def moment_table_case_a(system, d=None):
    """Assemble the case A moment table from monomial moments.

    The moments come from the gram matrix of the monomial expansion
    coefficients: gamma[i, j] = sum_r c_r(x^i) c_r(x^j).  The block
    column is read out of the assembled square matrix.
    """
    if system.case != "A":
        raise ValueError("expected a case A system")
    if d is None:
        d = _largest_fitting_d(system)
    N = system.N
    size = (d + 1) * N  # monomials x^0 .. x^{(d+1)N-1}
    K = _triangular_columns(system, size)
    G = K.T @ K
    blocks_ld = np.empty((d + 1, N, N), dtype=CLD)
    for k in range(d + 1):
        blocks_ld[k] = G[k * N : (k + 1) * N, :N]
    return MomentTable(
        N=N,
        case="A",
        blocks=blocks_ld.astype(np.complex128),
        blocks_ld=blocks_ld,
        assembled=G,
    )


def moment_table_case_b(system, d=None):
    """Assemble the case B moment table by the left-orthogonality recursion.

    Seeds gamma[k, l] = delta for k, l < N; each further row follows from
    sigma(p_n, x^j) = 0 for j < N <= n with p_n monic:

        gamma[n, j] = -sum_{r<n} a_{n,r} gamma[r, j].

    The Hankel shift then extends the first block column to all moments.
    """
    if system.case != "B":
        raise ValueError("expected a case B system")
    if not np.all(system.leading == 1.0):
        raise ValueError("case B table requires a monic system")
    if d is None:
        d = _largest_fitting_d(system)
    N = system.N
    rows = (d + 1) * N
    if rows - 1 > system.K:
        raise ValueError(
            f"system reaches degree {system.K}, table extent d={d} needs {rows - 1}"
        )
    col = np.zeros((rows, N), dtype=CLD)
    for s in range(N):
        col[s, s] = 1.0
    for n in range(N, rows):
        a = system.polys[n].coeffs.astype(CLD)
        col[n, :] = -(a[:n] @ col[:n, :])
    blocks_ld = np.empty((d + 1, N, N), dtype=CLD)
    for k in range(d + 1):
        blocks_ld[k] = col[k * N : (k + 1) * N, :]
    return MomentTable(
        N=N,
        case="B",
        blocks=blocks_ld.astype(np.complex128),
        blocks_ld=blocks_ld,
    )


def moment_table(system, d=None):
    if system.case == "A":
        return moment_table_case_a(system, d)
    return moment_table_case_b(system, d)


def table_pairing(u, v, table):
    """Bilinear moment pairing sum_{i,j} a_i b_j gamma[i, j].

    Coincides with the spectral form in case A and with the additional
    (bilinear) spectral functional in case B.  No conjugation anywhere.
    """
    a = _coeff_vector(u).astype(CLD)
    b = _coeff_vector(v).astype(CLD)
    if a.size == 0 or b.size == 0:
        return 0j
    G = table.gamma_matrix(a.size - 1, b.size - 1, ld=True)
    return complex(a @ G @ b)


@dataclass
class AxiomReport:
    case: str
    checked_up_to: int
    shift_residual: float
    identity_residual: float
    degeneracy_failures: list
    shift_structural: bool = False

    @property
    def ok(self):
        return (
            self.shift_residual <= 1e-10
            and self.identity_residual == 0.0
            and not self.degeneracy_failures
        )

    def to_dict(self):
        return {
            "case": self.case,
            "checked_up_to": self.checked_up_to,
            "shift_residual": self.shift_residual,
            "identity_residual": self.identity_residual,
            "degeneracy_failures": list(self.degeneracy_failures),
            "shift_structural": self.shift_structural,
            "ok": self.ok,
        }


def _shift_and_identity(table, k_max):
    N = table.N
    if table.assembled is not None:
        G = np.asarray(table.assembled, dtype=np.complex128)
        structural = False
    else:
        # only the first block column exists; take the largest square the
        # Hankel accessor can serve
        m = (table.d // 2 + 1) * N - 1
        G = table.gamma_matrix(m, m).astype(np.complex128)
        structural = True
    scale = max(1.0, float(np.max(np.abs(G))))
    top = min(2 * k_max - N, G.shape[0] - 1 - N)
    shift = 0.0
    for i in range(max(0, top + 1)):
        jtop = min(top - i, G.shape[1] - 1 - N)
        if jtop < 0:
            continue
        diff = G[i + N, : jtop + 1] - G[i, N : N + jtop + 1]
        if diff.size:
            shift = max(shift, float(np.max(np.abs(diff))) / scale)
    ident = float(np.max(np.abs(G[:N, :N] - np.eye(N))))
    return shift, ident, structural


def check_axioms_case_a(table, k_max):
    """Verify the three case A spectral-function conditions on a table.

    1. shift invariance gamma[i+N, j] == gamma[i, j+N] on the assembled
       moments (scaled residual),
    2. identity block gamma[i, j] == delta for i, j < N (exact),
    3. nondegeneracy: no null vector of Gamma_k^T has a nonzero last
       coordinate, for every k <= k_max (rank cutoff 1e-9 * ||Gamma_k||).
    """
    if table.case != "A":
        raise ValueError("expected a case A table")
    shift, ident, structural = _shift_and_identity(table, k_max)
    failures = []
    for k in range(k_max + 1):
        Gk = table.gamma_matrix(k, k).astype(np.complex128)
        u, sv, vh = np.linalg.svd(Gk.T)
        cutoff = 1e-9 * (sv[0] if sv.size else 1.0)
        null_rows = vh[sv <= cutoff]
        if null_rows.size and float(np.max(np.abs(null_rows[:, k]))) > 1e-8:
            failures.append(k)
    return AxiomReport(
        case="A",
        checked_up_to=k_max,
        shift_residual=shift,
        identity_residual=ident,
        degeneracy_failures=failures,
        shift_structural=structural,
    )


def check_axioms_case_b(table, m_max):
    """Verify the case B conditions: shift, identity block, and
    nonvanishing determinants of the truncations Gamma_M for M <= m_max.

    The determinant cutoff is 1e-10 * max(1, ||Gamma_M||_2).  A cutoff
    that scales with ||Gamma_M||^(M+1) would reject every table whose
    moments grow while its orthogonality structure keeps det = 1, the
    free Jacobi matrix included, so the scale factor enters linearly.

    The table stores only the first block column, so the shift condition
    is structural for case B tables (flagged in the report).
    """
    if table.case != "B":
        raise ValueError("expected a case B table")
    shift, ident, structural = _shift_and_identity(table, m_max)
    failures = []
    for M in range(m_max + 1):
        GM = table.gamma_matrix(M, M).astype(np.complex128)
        norm = float(np.linalg.norm(GM, 2))
        sign, logabs = np.linalg.slogdet(GM)
        if sign == 0 or logabs < np.log(1e-10 * max(1.0, norm)):
            failures.append(M)
    return AxiomReport(
        case="B",
        checked_up_to=m_max,
        shift_residual=shift,
        identity_residual=ident,
        degeneracy_failures=failures,
        shift_structural=structural,
    )
