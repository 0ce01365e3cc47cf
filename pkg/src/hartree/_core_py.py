"""Numpy versions of the compiled kernels in ``_core.pyx``.

Same quadrature rules as the compiled core, so the two backends agree to
rounding. This one is much slower and ignores ``num_threads``.
"""

import numpy as np

NGAUSS = 12
_x, _w = np.polynomial.legendre.leggauss(NGAUSS)
GX = 0.5 * (_x + 1.0)
GW = 0.5 * _w

_CHUNK = 1 << 18


def _angular_chunk(t, sin_power):
    with np.errstate(divide="ignore"):
        width = np.where(t > 0.0, np.maximum((1.0 - t) / np.sqrt(t), 1e-14), np.pi)
    e0 = np.minimum(width, 0.25 * np.pi)
    npan = np.ceil(np.log2(np.pi / e0)).astype(int) + 1
    acc = np.zeros_like(t)
    one_mt = 1.0 - t
    for k in range(int(npan.max())):
        m = npan > k
        a = e0[m] * 2.0 ** (k - 1) if k else np.zeros(int(m.sum()))
        b = np.minimum(e0[m] * 2.0**k, np.pi)
        live = b > a
        th = a[:, None] + (b - a)[:, None] * GX[None, :]
        s = np.sin(0.5 * th)
        tm = t[m][:, None]
        d = one_mt[m][:, None] ** 2 + 4.0 * tm * s * s
        contrib = (b - a) * np.sum(GW * np.sin(th) ** sin_power / (d * d), axis=1)
        acc[m] += np.where(live, contrib, 0.0)
    return acc


def angular_integral(t, N, num_threads=1):
    t = np.ascontiguousarray(t, dtype=float)
    out = np.empty_like(t)
    for lo in range(0, t.size, _CHUNK):
        out[lo:lo + _CHUNK] = _angular_chunk(t[lo:lo + _CHUNK], N - 2)
    return out


def pair_kernel(r, N, exponent, num_threads=1):
    r = np.ascontiguousarray(r, dtype=float)
    n = r.size
    iu, ju = np.triu_indices(n, k=1)
    mx = np.maximum(r[iu], r[ju])
    mn = np.minimum(r[iu], r[ju])
    out = np.zeros((n, n))
    vals = np.zeros(mx.size)
    pos = mx > 0.0
    vals[pos] = angular_integral(mn[pos] / mx[pos], N) / mx[pos] ** exponent
    out[iu, ju] = vals
    out[ju, iu] = vals
    return out


def row_matvec(a, x, num_threads=1):
    # einsum without optimize never dispatches to BLAS
    return np.einsum("ij,j->i", a, x)
