# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled geometry kernels. Must stay bit-identical to ``_pykernels``."""


def advance(double[::1] x, double[::1] y, double[::1] vx, double[::1] vy,
            const unsigned char[::1] alive, double dt, double width, double height):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double nx, ny
    for i in range(n):
        if not alive[i]:
            continue
        nx = x[i] + vx[i] * dt
        ny = y[i] + vy[i] * dt
        if nx < 0.0:
            nx = -nx
            vx[i] = -vx[i]
        elif nx > width:
            nx = 2.0 * width - nx
            vx[i] = -vx[i]
        if ny < 0.0:
            ny = -ny
            vy[i] = -vy[i]
        elif ny > height:
            ny = 2.0 * height - ny
            vy[i] = -vy[i]
        x[i] = min(max(nx, 0.0), width)
        y[i] = min(max(ny, 0.0), height)


def in_range(const double[::1] x, const double[::1] y, const unsigned char[::1] alive,
             Py_ssize_t i, double r2):
    cdef Py_ssize_t j, n = x.shape[0]
    cdef double xi = x[i], yi = y[i], dx, dy
    cdef list out = []
    for j in range(n):
        if j == i or not alive[j]:
            continue
        dx = x[j] - xi
        dy = y[j] - yi
        if dx * dx + dy * dy <= r2:
            out.append(j)
    return out


def mean_degree(const double[::1] x, const double[::1] y, const unsigned char[::1] alive,
                double r2):
    cdef Py_ssize_t i, j, n = x.shape[0]
    cdef Py_ssize_t pairs = 0, live = 0
    cdef double dx, dy
    for i in range(n):
        if not alive[i]:
            continue
        live += 1
        for j in range(i + 1, n):
            if not alive[j]:
                continue
            dx = x[j] - x[i]
            dy = y[j] - y[i]
            if dx * dx + dy * dy <= r2:
                pairs += 1
    if live == 0:
        return 0.0
    return 2.0 * pairs / live
