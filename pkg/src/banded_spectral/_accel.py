"""Numba-accelerated grid kernels with a pure-numpy fallback.

The hot loops of this package are series evaluations of the analytic
Laurent weight on dense theta grids (thousands of nodes times hundreds
of series terms).  Those kernels are compiled with numba when it is
available.  Setting the environment variable

    BANDED_SPECTRAL_PURE_NUMPY=1

forces the vectorized numpy implementations instead; the same happens
automatically when numba is not installed.  Both paths consume
truncation counts computed up front by the callers, so they sum exactly
the same terms in the same per-node order.

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

import os

import numpy as np

FORCE_NUMPY = os.environ.get("BANDED_SPECTRAL_PURE_NUMPY", "") not in ("", "0")

try:
    if FORCE_NUMPY:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend():
    return "numba" if HAVE_NUMBA else "numpy"


def set_thread_cap(count):
    """Honor a thread cap (BANDED_SPECTRAL_THREADS) when numba is active."""
    if HAVE_NUMBA and count:
        import numba

        numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))


# ---------------------------------------------------------------------------
# phi_n series: sum_m  (2m+n-1)! / (m! (m+n)!) z^{-2m}
# term ratio: t_{m+1}/t_m = (2m+n)(2m+n+1) / ((m+1)(m+n+1)) * z^{-2}
# ---------------------------------------------------------------------------


def _phi_grid_numpy(n, z, m_stop):
    w = 1.0 / z**2
    term = np.full(z.shape, 1.0 / n, dtype=np.complex128)
    acc = term.copy()
    for m in range(m_stop):
        term = term * ((2 * m + n) * (2 * m + n + 1) / ((m + 1) * (m + n + 1))) * w
        acc += term
    return acc


@njit(cache=True)
def _phi_grid_numba(n, z, m_stop):  # pragma: no cover - exercised via dispatch
    out = np.empty(z.shape[0], dtype=np.complex128)
    for j in range(z.shape[0]):
        w = 1.0 / (z[j] * z[j])
        term = 1.0 / n + 0j
        acc = term
        for m in range(m_stop):
            term = term * ((2 * m + n) * (2 * m + n + 1) / ((m + 1) * (m + n + 1))) * w
            acc += term
        out[j] = acc
    return out


def phi_grid(n, z, m_stop):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    if HAVE_NUMBA:
        return _phi_grid_numba(n, z, m_stop)
    return _phi_grid_numpy(n, z, m_stop)


# ---------------------------------------------------------------------------
# analytic weight: w(z) = sum_{n>=1} n c^{n-1} z^{-n} phi_n(z)
# ---------------------------------------------------------------------------


def _weight_grid_numpy(c, z, n_stop, m_stops):
    zi = 1.0 / z
    w2 = zi * zi
    acc = np.zeros(z.shape, dtype=np.complex128)
    pref = zi.copy()  # n c^{n-1} z^{-n} at n = 1
    for n in range(1, n_stop + 1):
        term = np.full(z.shape, 1.0 / n, dtype=np.complex128)
        phi = term.copy()
        for m in range(m_stops[n - 1]):
            term = term * ((2 * m + n) * (2 * m + n + 1) / ((m + 1) * (m + n + 1))) * w2
            phi += term
        acc += pref * phi
        pref = pref * ((n + 1) / n) * c * zi
    return acc


@njit(cache=True)
def _weight_grid_numba(c, z, n_stop, m_stops):  # pragma: no cover
    out = np.empty(z.shape[0], dtype=np.complex128)
    for j in range(z.shape[0]):
        zi = 1.0 / z[j]
        w2 = zi * zi
        acc = 0j
        pref = zi
        for n in range(1, n_stop + 1):
            term = 1.0 / n + 0j
            phi = term
            for m in range(m_stops[n - 1]):
                term = term * ((2 * m + n) * (2 * m + n + 1) / ((m + 1) * (m + n + 1))) * w2
                phi += term
            acc += pref * phi
            pref = pref * ((n + 1) / n) * c * zi
        out[j] = acc
    return out


def weight_grid(c, z, n_stop, m_stops):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    m_stops = np.ascontiguousarray(m_stops, dtype=np.int64)
    if HAVE_NUMBA:
        return _weight_grid_numba(complex(c), z, n_stop, m_stops)
    return _weight_grid_numpy(complex(c), z, n_stop, m_stops)


# ---------------------------------------------------------------------------
# batched Horner evaluation of many coefficient rows on one grid
# ---------------------------------------------------------------------------


def _horner_many_numpy(coeffs, lengths, z):
    out = np.empty((coeffs.shape[0], z.shape[0]), dtype=np.complex128)
    for i in range(coeffs.shape[0]):
        L = lengths[i]
        if L == 0:
            out[i] = 0.0
            continue
        acc = np.full(z.shape, coeffs[i, L - 1], dtype=np.complex128)
        for k in range(L - 2, -1, -1):
            acc = acc * z + coeffs[i, k]
        out[i] = acc
    return out


@njit(cache=True)
def _horner_many_numba(coeffs, lengths, z):  # pragma: no cover
    out = np.empty((coeffs.shape[0], z.shape[0]), dtype=np.complex128)
    for i in range(coeffs.shape[0]):
        L = lengths[i]
        for j in range(z.shape[0]):
            if L == 0:
                out[i, j] = 0.0
                continue
            acc = coeffs[i, L - 1]
            for k in range(L - 2, -1, -1):
                acc = acc * z[j] + coeffs[i, k]
            out[i, j] = acc
    return out


def horner_many(coeffs, lengths, z):
    """Evaluate rows of a padded coefficient matrix at every node of z."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    lengths = np.ascontiguousarray(lengths, dtype=np.int64)
    z = np.ascontiguousarray(z, dtype=np.complex128)
    if HAVE_NUMBA:
        return _horner_many_numba(coeffs, lengths, z)
    return _horner_many_numpy(coeffs, lengths, z)
