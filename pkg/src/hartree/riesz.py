"""Riesz potentials |x|^-4 * f and Newton potentials |x|^(2-N) * f of radial f.

For radial f the convolution reduces to a one-dimensional integral

    P(r) = int_0^inf K(r, s) f(s) s^(N-1) ds,

with K the spherical mean of the kernel. For |x|^(2-N), and for |x|^-4
in dimension 6, K = sigma_(N-1) max(r, s)^-k exactly. Otherwise K is the
angular integral evaluated by the compiled core.

Both paths integrate in the grid parameter with singularity subtraction,

    int K(r_i, s(x)) H(x) dx ~ sum_j w_j K_ij (H_j - H_i) + H_i Z_i,

where Z_i is the integral of K(r_i, s(x)) over x in [0, 1], computed exactly
or with panels graded toward x_i. This absorbs the kink of K at s = r and,
in dimension 5, its logarithmic singularity.
"""

import math
import threading
import warnings

import numpy as np

from . import kernels
from .constants import riesz_identity_constant, sphere_area
from .errors import ConfigurationError, DomainError, IntegrabilityError
from .radial import RadialField, integrate_volume

MU = 4


class AccuracyWarning(UserWarning):
    """The requested accuracy may not be reached on this grid."""


def _gauss_graded(levels=24, npts=8):
    """Rule on [0, 1] with geometric panels [2^-(k+1), 2^-k] accumulating at 0."""
    gx, gw = np.polynomial.legendre.leggauss(npts)
    gx = 0.5 * (gx + 1.0)
    gw = 0.5 * gw
    xs, ws = [], []
    for k in range(levels):
        a, b = 2.0 ** -(k + 1), 2.0**-k
        xs.append(a + (b - a) * gx)
        ws.append((b - a) * gw)
    b = 2.0**-levels
    xs.append(b * gx)
    ws.append(b * gw)
    return np.concatenate(xs), np.concatenate(ws)


_GRADED = _gauss_graded()


class KernelMatrix:
    """Discrete radial convolution operator on one grid for one kernel.

    ``apply_grid`` maps node values of f to node values of the potential of
    the part of f inside R_max. ``apply`` adds the power-law tail of f and
    returns a :class:`RadialField`. The operator is self-adjoint for the
    volume-weighted inner product, up to rounding.
    """

    def __init__(self, grid, exponent, harmonic):
        self.grid = grid
        self.exponent = int(exponent)
        self.harmonic = bool(harmonic)
        self._tails = {}
        self._lock = threading.Lock()
        g = grid
        N, k = g.N, self.exponent
        self._h_scale = g.nodes ** (N - 1) * g.dr  # H = f * s^(N-1) * ds/dx
        if harmonic:
            self.sigma = sphere_area(N)
            self._setup_harmonic()
        else:
            self.sigma = sphere_area(N - 1)
            self._setup_angular()

    @property
    def mu(self):
        return self.exponent

    # exact kernel sigma * max(r, s)^-k
    def _setup_harmonic(self):
        g, k = self.grid, self.exponent
        r, x, w, q = g.nodes, g.x, g.trap, g.q
        with np.errstate(divide="ignore"):
            rk = np.where(r > 0.0, r ** (-float(k)), 0.0)
        self._rk = rk
        csum_w = np.cumsum(w)
        tail_w = np.concatenate([np.cumsum((w * rk)[::-1])[::-1][1:], [0.0]])
        ksum = rk * csum_w + tail_w
        z = np.zeros_like(r)
        xi = x[1:]
        z[1:] = xi * rk[1:] + g.R_max ** (-float(k)) * (xi ** (1.0 - q * k) - 1.0) / (q * k - 1.0)
        self._zfix = z - ksum
        self._zfix[0] = 0.0

    def _apply_harmonic(self, f):
        w, rk = self.grid.trap, self._rk
        h = f * self._h_scale
        a = np.cumsum(w * h)
        b = np.concatenate([np.cumsum((w * rk * h)[::-1])[::-1][1:], [0.0]])
        out = rk * a + b + h * self._zfix
        # at r = 0 the kernel is s^-k and the plain rule applies
        out[0] = b[0]
        return self.sigma * out

    # angular kernel, dense
    def _setup_angular(self):
        g, k = self.grid, self.exponent
        N, r, w = g.N, g.nodes, g.trap
        # zero diagonal: K(r, r) drops out of the subtracted sum
        K = kernels.pair_kernel(r, N, k)
        row_sum = kernels.matvec(K, w.copy())
        off = K * w[None, :]
        z = self._z_angular()
        G = off * self._h_scale[None, :]
        d = (z - row_sum) * self._h_scale
        d[0] = 0.0
        G[np.diag_indices_from(G)] = d
        G *= self.sigma
        self._G = np.ascontiguousarray(G)

    def _z_angular(self):
        """Integral over x in [0, 1] of K(r_i, s(x)), graded toward x_i from both sides."""
        g, k = self.grid, self.exponent
        N, R, q = g.N, g.R_max, g.q
        u, wu = _GRADED
        xi = g.x[1:, None]
        ri = g.nodes[1:, None]
        left_x = xi * (1.0 - u[None, :])
        right_x = xi + (1.0 - xi) * u[None, :]
        z = np.zeros(g.size)
        parts = []
        for xs, scale in ((left_x, xi), (right_x, 1.0 - xi)):
            s = R * xs**q
            mx = np.maximum(s, ri)
            mn = np.minimum(s, ri)
            t = (mn / mx).ravel()
            kap = kernels.angular_integral(t, N).reshape(s.shape)
            parts.append(np.sum(kap / mx**k * wu[None, :], axis=1) * np.ravel(scale))
        z[1:] = parts[0] + parts[1]
        return z

    def matrix(self):
        """Dense operator (angular path only)."""
        if self.harmonic:
            raise ConfigurationError("the harmonic path has no stored matrix")
        return self._G

    def apply_grid(self, f):
        """Potential at the nodes of the part of ``f`` inside R_max."""
        f = np.ascontiguousarray(f, dtype=float)
        if self.harmonic:
            return self._apply_harmonic(f)
        return kernels.matvec(self._G, f)

    def tail_vector(self, p):
        """Per-node potential of (R/s)^p on s > R_max (unit coefficient)."""
        g = self.grid
        N, k = g.N, self.exponent
        if not p > N - k:
            raise IntegrabilityError(
                f"kernel |x|^-{k} against a tail ~ r^-{p:g} diverges in dimension {N} (need exponent > {N - k})",
                exponent=p,
            )
        with self._lock:
            if p in self._tails:
                return self._tails[p]
        R = g.R_max
        if self.harmonic:
            vec = np.full(g.size, self.sigma * R ** (N - k) / (p - N + k))
        else:
            u, wu = _GRADED
            # y in (0,1/2] graded toward 0 and [1/2,1) graded toward 1
            y = np.concatenate([0.5 * u, 1.0 - 0.5 * u])
            wy = np.concatenate([0.5 * wu, 0.5 * wu])
            t = (g.nodes[:, None] / R) * y[None, :]
            kap = kernels.angular_integral(t.ravel(), N).reshape(t.shape)
            vec = self.sigma * R ** (N - k) * (kap @ (wy * y ** (p - N + k - 1.0)))
        vec.setflags(write=False)
        with self._lock:
            self._tails[p] = vec
        return vec

    def apply(self, f):
        """Potential of the field ``f`` including its tail."""
        if f.grid != self.grid:
            raise ConfigurationError("field and kernel live on different grids")
        out = self.apply_grid(f.values)
        p = f.tail_exponent
        if not math.isinf(p) and f.tail_value != 0.0:
            out = out + f.tail_value * self.tail_vector(p)
        N, k = self.grid.N, self.exponent
        if math.isinf(p) or p >= N:
            p_out = float(k)
        else:
            p_out = p + k - N
        return RadialField(self.grid, out, p_out)


_CACHE = {}
_CACHE_LOCK = threading.Lock()


def kernel_matrix(grid, exponent=MU, method="auto"):
    """Cached operator for the kernel |x|^-exponent on ``grid``.

    ``method`` is ``"auto"`` (exact harmonic path whenever
    ``exponent == N - 2``), ``"harmonic"`` or ``"angular"``.
    """
    N = grid.N
    if exponent not in (MU, N - 2):
        raise ConfigurationError(f"only the kernels |x|^-4 and |x|^-{N - 2} are available")
    if not exponent < N:
        raise ConfigurationError(f"kernel |x|^-{exponent} is not locally integrable in dimension {N}")
    if method == "auto":
        harmonic = exponent == N - 2
    elif method in ("harmonic", "angular"):
        harmonic = method == "harmonic"
        if harmonic and exponent != N - 2:
            raise ConfigurationError("the harmonic path needs exponent N - 2")
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    key = (grid.key, int(exponent), harmonic)
    with _CACHE_LOCK:
        km = _CACHE.get(key)
    if km is None:
        km = KernelMatrix(grid, exponent, harmonic)
        with _CACHE_LOCK:
            km = _CACHE.setdefault(key, km)
    return km


def clear_cache():
    with _CACHE_LOCK:
        _CACHE.clear()


def newton_potential(f):
    """Unnormalised Newton potential |x|^(2-N) * f; multiply by R_N to invert -Laplace."""
    return kernel_matrix(f.grid, f.grid.N - 2).apply(f)


def riesz_potential_mu4(f, method="auto"):
    """|x|^-4 * f. Dimension 5 has a log-singular spherical mean and lower accuracy."""
    g = f.grid
    if g.N == 5 and g.M < 1024:
        warnings.warn(
            f"dimension 5 with M={g.M}: the log-singular diagonal is under-resolved, "
            "expect relative errors above 1e-3",
            AccuracyWarning,
            stacklevel=2,
        )
    return kernel_matrix(g, MU, method).apply(f)


def nonlocal_double(f, g, method="auto"):
    """Double integral of f(x) g(y) |x-y|^-4 over R^N x R^N."""
    pot = riesz_potential_mu4(g, method)
    prod = f * pot
    return integrate_volume(f.grid, prod.values, prod.tail_exponent, "nonlocal double integral")


def identity_check(grid, s=2, method="auto", count=20, r_max=25.0):
    """Residual of |x|^(-2s) * (1+r^2)^(s-N) = I(s) (1+r^2)^(-s).

    The kernel exponent 2s must be 4 or N - 2. The relative residual is
    taken at ``count`` nodes spread log-uniformly over [0.01, r_max], with
    the origin always included.
    """
    N = grid.N
    k = 2 * s
    if k not in (MU, N - 2):
        raise DomainError(f"identity needs 2s in (4, {N - 2}), got s={s}")
    if not r_max < grid.R_max:
        raise DomainError(f"sample radius {r_max} must lie inside R_max={grid.R_max}")
    r = grid.nodes
    f = RadialField(grid, (1.0 + r * r) ** (s - N), 2.0 * (N - s))
    km = kernel_matrix(grid, int(k), method)
    if N == 5 and k == MU and grid.M < 1024:
        warnings.warn("dimension 5 with a coarse grid: expect relative errors above 1e-3", AccuracyWarning, stacklevel=2)
    pot = km.apply(f).values
    exact = riesz_identity_constant(N, s) * (1.0 + r * r) ** (-s)
    targets = np.geomspace(1e-2, r_max, count - 1)
    idx = np.unique(np.concatenate([[0], np.searchsorted(r, targets, side="right") - 1]))
    idx = idx[r[idx] <= r_max]
    rel = np.abs(pot[idx] - exact[idx]) / exact[idx]
    return {
        "radii": r[idx].tolist(),
        "relative_residuals": rel.tolist(),
        "max_relative_residual": float(np.max(rel)),
        "I_s": riesz_identity_constant(N, s),
        "kernel": "harmonic" if km.harmonic else "angular",
    }
