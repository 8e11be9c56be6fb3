# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_kernels_py``.

Same algorithms, constants, and iteration depths; plain sequential loops
(no threading) so results are deterministic and match the numpy backend to
the last bit or two.
"""

from libc.math cimport exp, fabs

import numpy as np

NAME = "compiled"

FORM_STANDARD = 0
FORM_EXACT = 1
FORM_ZERO_CENTERED = 2

cdef double TWO_OVER_SQRT_PI = 1.1283791670955126
cdef double SQRT_PI = 1.772453850905516
cdef double INV_SQRT2 = 0.7071067811865476
cdef double SQRT_2_OVER_PI = 0.7978845608028654

cdef int SERIES_TERMS = 48
cdef int CF_DEPTH = 64
cdef double SAT_T = 10.0


cdef double _erf(double x) noexcept nogil:
    cdef double ax = fabs(x)
    cdef double r, w, s, term, t
    cdef int k
    if ax < 2.0:
        # scaled series, all terms positive
        w = 2.0 * ax * ax
        s = 1.0
        term = 1.0
        for k in range(1, SERIES_TERMS):
            term *= w / (2.0 * k + 1.0)
            s += term
        r = TWO_OVER_SQRT_PI * ax * exp(-ax * ax) * s
    elif ax < 6.0:
        # Laplace continued fraction for erfc, backward recurrence
        t = 0.0
        for k in range(CF_DEPTH, 0, -1):
            t = (0.5 * k) / (ax + t)
        r = 1.0 - exp(-ax * ax) / ((ax + t) * SQRT_PI)
    else:
        r = 1.0
    return -r if x < 0.0 else r


def erf_array(xs):
    """Elementwise erf; abs error < 1e-13, exact +-1 saturation."""
    arr = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.empty_like(arr)
    cdef double[::1] xv = arr.ravel()
    cdef double[::1] ov = out.ravel()
    cdef Py_ssize_t i, m = xv.shape[0]
    with nogil:
        for i in range(m):
            ov[i] = _erf(xv[i])
    return out


def sau_arrays(xs, double alpha, double n, int form, bint grads=True):
    """Fused evaluation of a SAU form: (value, d_dx, d_dalpha) arrays."""
    if form not in (FORM_STANDARD, FORM_EXACT, FORM_ZERO_CENTERED):
        raise ValueError(f"unknown SAU form code {form!r}")
    arr = np.ascontiguousarray(xs, dtype=np.float64)
    value = np.empty_like(arr)

    cdef double[::1] xv = arr.ravel()
    cdef double[::1] vv = value.ravel()
    cdef Py_ssize_t i, m = xv.shape[0]
    cdef int f = form
    cdef double c = SQRT_2_OVER_PI
    cdef double half_1p = 0.5 * (1.0 + alpha)
    cdef double half_1m = 0.5 * (1.0 - alpha)
    cdef double gauss_std = c / (2.0 * n)
    cdef double x, t, E, g, xg

    if not grads:
        with nogil:
            for i in range(m):
                x = xv[i]
                t = n * x
                # saturated fast path: erf pinned to +-1, Gaussian factor
                # below half an ulp of every other term so pinned to 0
                if fabs(t) > SAT_T:
                    E = 1.0 if t > 0.0 else -1.0
                    g = 0.0
                else:
                    E = _erf(t * INV_SQRT2)
                    g = exp(-0.5 * t * t)
                if f == 0:
                    vv[i] = gauss_std * g + half_1p * x + half_1m * (x * E)
                elif f == 1:
                    vv[i] = half_1p * x + half_1m * (x * E + (c / n) * g)
                else:
                    vv[i] = gauss_std * (x * g) + half_1p * x \
                        + half_1m * (x * E)
        return value, None, None

    d_dx = np.empty_like(arr)
    d_da = np.empty_like(arr)
    cdef double[::1] dxv = d_dx.ravel()
    cdef double[::1] dav = d_da.ravel()
    with nogil:
        for i in range(m):
            x = xv[i]
            t = n * x
            if fabs(t) > SAT_T:
                E = 1.0 if t > 0.0 else -1.0
                g = 0.0
            else:
                E = _erf(t * INV_SQRT2)
                g = exp(-0.5 * t * t)
            xg = x * g
            if f == 0:
                vv[i] = gauss_std * g + half_1p * x + half_1m * (x * E)
                dxv[i] = (-0.5 * n * c) * xg + half_1p + half_1m * E \
                    + (n * half_1m * c) * xg
                dav[i] = 0.5 * x * (1.0 - E)
            elif f == 1:
                vv[i] = half_1p * x + half_1m * (x * E + (c / n) * g)
                dxv[i] = half_1p + half_1m * E
                dav[i] = 0.5 * x * (1.0 - E) - gauss_std * g
            else:
                vv[i] = gauss_std * (x * g) + half_1p * x + half_1m * (x * E)
                dxv[i] = gauss_std * g - (0.5 * c * n) * (x * xg) \
                    + half_1p + half_1m * E + (n * half_1m * c) * xg
                dav[i] = 0.5 * x * (1.0 - E)
    return value, d_dx, d_da
