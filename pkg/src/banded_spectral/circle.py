"""Positive matrix-valued densities on circles that interpolate a moment
block column, and quadrature verification of the pairing relations.

Given blocks S_0 = I, S_1, ..., S_d, the density

    W(theta) = (1/2pi) (I + sum_{k=1}^d [S_k r^{-k} e^{-ik theta} + h.c.])

on the circle of radius r reproduces every moment exactly:
int (r e^{i theta})^k W(theta) dtheta = S_k for k <= d, and vanishing
moments above d.  The radius is grown until the deviation part is small
enough that W stays uniformly positive definite.

The pairing of two polynomials against the density is the bilinear
(unconjugated) integral of their residue-split row vectors, evaluated
by trapezoid quadrature in extended precision.  On a uniform grid the
trapezoid rule is the discrete Fourier projection, so it is exact for
every trigonometric polynomial the integrands produce; the remaining
error is pure floating-point noise.
"""

from dataclasses import dataclass, field

import numpy as np

from ._xprec import CLD, LD, TWO_PI, circle_nodes, horner
from .polynomials import residue_split

MIN_NODES = 512
MAX_CONSISTENCY_NODES = 1 << 20


def _next_pow2(n):
    m = 1
    while m < n:
        m <<= 1
    return m


class CircleDensity:
    """Hermitian trigonometric-polynomial density on a circle.

    Stores the moment blocks and the radius; Fourier coefficients are
    C_0 = I/2pi, C_{-k} = S_k / (2pi r^k), C_k = C_{-k}^*.  The radius
    is a power of two, so forming the deviation matrices S_k / r^k is
    exact in binary floating point.
    """

    def __init__(self, blocks, radius):
        blocks = np.asarray(blocks)
        if blocks.ndim != 3 or blocks.shape[1] != blocks.shape[2]:
            raise ValueError("blocks must be a (d+1, N, N) array")
        if np.max(np.abs(blocks[0] - np.eye(blocks.shape[1]))) > 1e-12:
            raise ValueError("S_0 must be the identity")
        self.N = blocks.shape[1]
        self.radius = float(radius)
        self.blocks = blocks.astype(np.complex128)
        self._blocks_ld = blocks.astype(CLD)
        # deviations D_k = S_k / r^k, exact because r is a power of two
        self._dev_ld = np.array(
            [self._blocks_ld[k] / LD(self.radius) ** k for k in range(blocks.shape[0])]
        )

    @property
    def d(self):
        return self.blocks.shape[0] - 1

    def fourier_coefficient(self, k):
        """C_k with W(theta) = sum_k C_k e^{ik theta}; zero outside [-d, d]."""
        if abs(k) > self.d:
            return np.zeros((self.N, self.N), dtype=np.complex128)
        two_pi = 2 * np.pi
        if k == 0:
            return np.eye(self.N) / two_pi
        if k < 0:
            return np.asarray(self._dev_ld[-k], dtype=np.complex128) / two_pi
        return np.asarray(self._dev_ld[k], dtype=np.complex128).conj().T / two_pi

    def deviation_norm_sum(self):
        """2 sum_k ||S_k / r^k||_2, the uniform bound on the deviation of
        2pi W(theta) from the identity."""
        return 2.0 * sum(
            float(np.linalg.norm(np.asarray(self._dev_ld[k], dtype=np.complex128), 2))
            for k in range(1, self.d + 1)
        )

    def sample_grid(self, count):
        """(count, N, N) clongdouble samples of W on the uniform theta grid."""
        _, _, phase_conj = circle_nodes(self.radius, count)
        W = np.zeros((count, self.N, self.N), dtype=CLD)
        W[:] = np.eye(self.N, dtype=CLD)
        cur = np.ones(count, dtype=CLD)
        for k in range(1, self.d + 1):
            cur = cur * phase_conj
            Dk = self._dev_ld[k]
            W += cur[:, None, None] * Dk[None, :, :]
            W += np.conj(cur)[:, None, None] * np.conj(Dk).T[None, :, :]
        W /= TWO_PI
        return W

    def values(self, thetas):
        """Complex128 samples of W at arbitrary angles (plotting, CSV)."""
        thetas = np.asarray(thetas, dtype=float)
        W = np.zeros((thetas.size, self.N, self.N), dtype=np.complex128)
        W[:] = np.eye(self.N)
        for k in range(1, self.d + 1):
            ph = np.exp(-1j * k * thetas)
            Dk = np.asarray(self._dev_ld[k], dtype=np.complex128)
            W += ph[:, None, None] * Dk[None, :, :]
            W += np.conj(ph)[:, None, None] * Dk.conj().T[None, :, :]
        return W / (2 * np.pi)

    def min_eigenvalue(self, grid=4096):
        """Smallest eigenvalue of W over a uniform theta grid."""
        W = self.values(2 * np.pi * np.arange(grid) / grid)
        W = 0.5 * (W + np.conj(np.transpose(W, (0, 2, 1))))
        return float(np.min(np.linalg.eigvalsh(W)))


def select_radius(blocks):
    """Smallest power of two r >= 2 with 2 sum_k ||S_k||_2 / r^k <= 1/2.

    The margin guarantees W(theta) >= (1/4pi) I uniformly; the sum always
    drops below any threshold as r grows, so the loop terminates.
    """
    norms = [float(np.linalg.norm(S, 2)) for S in np.asarray(blocks, dtype=np.complex128)]
    r = 2.0
    while 2.0 * sum(norms[k] / r**k for k in range(1, len(norms))) > 0.5:
        r *= 2.0
    return r


def build_density(blocks):
    """Construct the positive density whose moments are the given blocks.

    Checks the construction immediately: deviation margin and a trace
    spot check on a coarse grid.
    """
    blocks = np.asarray(blocks, dtype=np.complex128)
    if blocks.ndim == 2:
        blocks = blocks[:, None, None]
    density = CircleDensity(blocks, select_radius(blocks))
    margin = density.deviation_norm_sum()
    if margin > 0.5:
        raise AssertionError("radius selection failed to control the deviation")
    tr = np.trace(density.values(2 * np.pi * np.arange(1024) / 1024), axis1=1, axis2=2)
    if float(np.min(tr.real)) < 0 or float(np.max(np.abs(tr.imag))) > 1e-12:
        raise AssertionError("density trace spot check failed")
    return density


def moment_quadrature(density, k, nodes=None):
    """Trapezoid value of int (r e^{i theta})^k W(theta) dtheta."""
    d = density.d
    M = nodes if nodes is not None else _next_pow2(max(MIN_NODES, 4 * (k + d) + 1))
    W = density.sample_grid(M)
    _, z, _ = circle_nodes(density.radius, M)
    zk = z**k
    acc = np.tensordot(zk, W, axes=(0, 0)) * (TWO_PI / M)
    return np.asarray(acc, dtype=np.complex128)


def density_moment(density, k):
    """k-th moment of the density, with a quadrature consistency check.

    The analytic value r^k * 2pi * C_{-k} reduces to the stored block
    (the radius is a power of two, so the scalings cancel exactly); the
    trapezoid quadrature must agree with it to 1e-10 relative to the
    largest stored moment.  Disagreement raises, since it means the
    sampled density and its moments drifted apart.
    """
    if k < 0:
        raise ValueError("moment index must be nonnegative")
    if k > density.d:
        analytic = np.zeros((density.N, density.N), dtype=np.complex128)
    else:
        analytic = np.array(density.blocks[k])
    scale = max(1.0, float(np.max(np.abs(density.blocks))))
    M = _next_pow2(max(MIN_NODES, 4 * (k + density.d) + 1))
    while True:
        quad = moment_quadrature(density, k, M)
        err = float(np.max(np.abs(quad - analytic)))
        if err <= 1e-10 * scale:
            return analytic
        if M >= MAX_CONSISTENCY_NODES:
            raise RuntimeError(
                f"density moment {k}: quadrature disagrees with the analytic "
                f"value by {err:.3e} at {M} nodes"
            )
        M *= 2


def moment_quadrature_table(density, k_max, nodes):
    """All moments k = 0 .. k_max from one FFT over the sampled density.

    The trapezoid sums are exactly the DFT coefficients, so a single
    transform of the (complex128) samples serves every k at once.
    """
    M = nodes
    if M <= 2 * (k_max + density.d):
        raise ValueError("node count too small for the requested moments")
    W = density.sample_grid(M).astype(np.complex128)
    F = np.fft.fft(W, axis=0) / M
    r = density.radius
    out = np.empty((k_max + 1, density.N, density.N), dtype=np.complex128)
    for k in range(k_max + 1):
        out[k] = 2 * np.pi * r**k * F[(M - k) % M]
    return out


def pairing_node_count(deg_u, deg_v, density, requested=None):
    """Node rule: at least 4 * (deg u + deg v + d N) + 1, power of two,
    at least 512; an explicit request is honored as a floor."""
    base = 4 * (deg_u + deg_v + density.d * density.N) + 1
    M = _next_pow2(max(MIN_NODES, base))
    if requested is not None:
        M = max(M, _next_pow2(int(requested)))
    return M


def _split_values(polys, modulus, z):
    """Stack of residue-split row values: out[n, m, j] = component m of
    poly n at node j (evaluation at z itself, no conjugation)."""
    out = np.empty((len(polys), modulus, z.shape[0]), dtype=CLD)
    for n, p in enumerate(polys):
        for m in range(modulus):
            out[n, m] = horner(residue_split(p, modulus, m).coeffs.astype(CLD), z)
    return out


def pairing(u, v, density, nodes=None):
    """Bilinear circle pairing of two polynomials against the density.

    Quadrature of  row(u)(z) W(theta) row(v)(z)^T  with z = r e^{i theta}
    and no conjugation of either factor.  Requires the density to cover
    the moments the product touches.
    """
    du = 0 if u.is_zero else u.degree
    dv = 0 if v.is_zero else v.degree
    N = density.N
    if int(np.ceil((du + dv) / N)) > density.d:
        raise ValueError(
            f"density extent d={density.d} cannot pair degrees {du} and {dv}"
        )
    M = pairing_node_count(du, dv, density, nodes)
    _, z, _ = circle_nodes(density.radius, M)
    W = density.sample_grid(M)
    rows = _split_values([u, v], N, z)
    acc = np.zeros(M, dtype=CLD)
    for a in range(N):
        for b in range(N):
            acc += rows[0, a] * W[:, a, b] * rows[1, b]
    return complex(acc.sum() * (TWO_PI / M))


@dataclass
class OrthogonalityReport:
    """Residuals of the integral orthogonality relations for one system."""

    case: str
    n_max: int
    radius: float
    nodes: int
    certified_degree: int
    residuals: dict = field(default_factory=dict)  # (n, m) -> complex residual
    eta: list = field(default_factory=list)  # case B diagonal values

    @property
    def max_abs_residual(self):
        return max((abs(r) for r in self.residuals.values()), default=0.0)

    @property
    def min_abs_eta(self):
        return min((abs(e) for e in self.eta), default=float("nan"))

    def to_dict(self):
        rows = [
            {"n": n, "m": m, "re": r.real, "im": r.imag, "abs": abs(r)}
            for (n, m), r in sorted(self.residuals.items())
        ]
        out = {
            "relation": "orthonormality" if self.case == "A" else "left-orthogonality",
            "case": self.case,
            "n_max": self.n_max,
            "radius": self.radius,
            "nodes": self.nodes,
            "certified_degree": self.certified_degree,
            "max_abs_residual": self.max_abs_residual,
            "residuals": rows,
        }
        if self.case == "B":
            out["eta"] = [[e.real, e.imag] for e in self.eta]
            out["min_abs_eta"] = self.min_abs_eta
        return out


def verify_orthogonality(system, density, n_max, nodes=None):
    """Certify the pairing relations for all 0 <= m <= n <= n_max.

    Case A expects pairing(p_n, p_m) = delta.  Case B expects zero above
    the diagonal and records the diagonal values eta_n, which must stay
    away from zero.  The report states the certified degree range, since
    the truncated density only covers pairings whose moments it stores.
    """
    N = system.N
    if n_max > system.K:
        raise ValueError("system does not reach n_max")
    if int(np.ceil(2 * n_max / N)) > density.d:
        raise ValueError("density extent too small for n_max")
    polys = [system.polys[n] for n in range(n_max + 1)]
    M = pairing_node_count(n_max, n_max, density, nodes)
    _, z, _ = circle_nodes(density.radius, M)
    W = density.sample_grid(M)
    rows = _split_values(polys, N, z)
    weight = TWO_PI / M
    report = OrthogonalityReport(
        case=system.case,
        n_max=n_max,
        radius=density.radius,
        nodes=M,
        certified_degree=density.d * N // 2,
    )
    # contract the W factor once per polynomial: mid[n, b, j] = (row_n W)_b
    mid = np.zeros((len(polys), N, M), dtype=CLD)
    for b in range(N):
        for a in range(N):
            mid[:, b, :] += rows[:, a, :] * W[:, a, b][None, :]
    for n in range(n_max + 1):
        for m in range(n + 1):
            val = complex((mid[n] * rows[m]).sum() * weight)
            if system.case == "A":
                expected = 1.0 if n == m else 0.0
                report.residuals[(n, m)] = val - expected
            else:
                if n == m:
                    report.eta.append(val)
                else:
                    report.residuals[(n, m)] = val
    return report
