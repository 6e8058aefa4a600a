# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, M_PI

cnp.import_array()


cdef inline Py_ssize_t _reflect(Py_ssize_t i, Py_ssize_t n) nogil:
    # edge-repeating reflection: (c b a | a b c | c b a)
    while i < 0 or i >= n:
        if i < 0:
            i = -i - 1
        else:
            i = 2 * n - i - 1
    return i


def median2d_argmedian(double[:, ::1] image, int kernel):
    cdef Py_ssize_t ny = image.shape[0]
    cdef Py_ssize_t nx = image.shape[1]
    cdef int r = kernel // 2
    cdef int size = kernel * kernel
    cdef int mid = size // 2
    out = np.empty((ny, nx), dtype=np.float64)
    src = np.empty((ny, nx), dtype=np.intp)
    cdef double[:, ::1] out_v = out
    cdef Py_ssize_t[:, ::1] src_v = src
    cdef double[::1] vals = np.empty(size, dtype=np.float64)
    cdef Py_ssize_t[::1] idx = np.empty(size, dtype=np.intp)
    cdef Py_ssize_t i, j, yy, xx, t, s
    cdef int dy, dx, n
    cdef double v
    cdef Py_ssize_t vi

    with nogil:
        for i in range(ny):
            for j in range(nx):
                n = 0
                for dy in range(-r, r + 1):
                    yy = _reflect(i + dy, ny)
                    for dx in range(-r, r + 1):
                        xx = _reflect(j + dx, nx)
                        v = image[yy, xx]
                        vi = yy * nx + xx
                        # stable insertion keeps raster order among ties
                        t = n
                        while t > 0 and vals[t - 1] > v:
                            vals[t] = vals[t - 1]
                            idx[t] = idx[t - 1]
                            t -= 1
                        vals[t] = v
                        idx[t] = vi
                        n += 1
                out_v[i, j] = vals[mid]
                src_v[i, j] = idx[mid]
    return out, src


def pointsource_field(double[::1] xs, double[::1] ys, double[:, ::1] points,
                      double[::1] amplitudes, double[::1] phases, double wavelength):
    cdef Py_ssize_t ny = ys.shape[0]
    cdef Py_ssize_t nx = xs.shape[0]
    cdef Py_ssize_t npts = points.shape[0]
    out = np.zeros((ny, nx), dtype=np.complex128)
    cdef double[:, :, ::1] out_v = out.view(np.float64).reshape(ny, nx, 2)
    cdef double k = 2.0 * M_PI / wavelength
    cdef Py_ssize_t i, j, p
    cdef double dx, dy, dz, rr, arg, scale, re, im

    with nogil:
        for i in range(ny):
            for j in range(nx):
                re = 0.0
                im = 0.0
                for p in range(npts):
                    dx = xs[j] - points[p, 0]
                    dy = ys[i] - points[p, 1]
                    dz = points[p, 2]
                    rr = sqrt(dx * dx + dy * dy + dz * dz)
                    arg = k * rr + phases[p]
                    scale = amplitudes[p] / rr
                    re = re + scale * cos(arg)
                    im = im - scale * sin(arg)
                out_v[i, j, 0] = re
                out_v[i, j, 1] = im
    return out
