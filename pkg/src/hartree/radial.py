"""Radial functions on R^N sampled on a graded grid r_j = R (j/M)^q.

Integrals use the trapezoid rule in the grid parameter x = j/M, which is
smooth for smooth radial integrands, plus an analytic correction for the
power-law tail f(r) ~ f(R) (R/r)^p beyond the last node. Derivatives are
fourth-order differences in x mapped back through dr/dx.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import check_dimension, sphere_area
from .errors import ConfigurationError, DomainError, IntegrabilityError

DEFAULT_R_MAX = 50.0
DEFAULT_M = 2048
DEFAULT_Q = 2.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Graded nodes ``R_max * (j/M)**q`` for j = 0..M in dimension ``N``."""

    N: int
    R_max: float
    M: int
    q: float

    def __post_init__(self):
        x = np.arange(self.M + 1) / self.M
        nodes = self.R_max * x**self.q
        nodes[-1] = self.R_max
        # trapezoid in x, mapped through dr/dx
        w = np.full(self.M + 1, 1.0 / self.M)
        w[0] = w[-1] = 0.5 / self.M
        if self.q == 1.0:
            dr = np.full(self.M + 1, self.R_max)
        else:
            dr = self.q * self.R_max * x ** (self.q - 1.0)
        vol = sphere_area(self.N) * w * dr * nodes ** (self.N - 1)
        for name, arr in (("x", x), ("nodes", nodes), ("dr", dr), ("trap", w), ("volume_weights", vol)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def key(self):
        return (self.N, self.R_max, self.M, self.q)

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def size(self):
        return self.M + 1

    def to_dict(self):
        return {"N": self.N, "R_max": self.R_max, "M": self.M, "q": self.q}


def make_grid(N, R_max=DEFAULT_R_MAX, M=DEFAULT_M, q=DEFAULT_Q):
    """Build a graded grid; ``M >= 16``, ``R_max > 0`` and ``q >= 1`` are required.

    Examples
    --------
    >>> g = make_grid(6, 50.0, 1024, 2)
    >>> float(g.nodes[1])
    4.76837158203125e-05
    """
    N = check_dimension(N, minimum=3)
    if int(M) != M or M < 16:
        raise ConfigurationError(f"grid needs M >= 16 intervals, got {M}")
    if not (R_max > 0.0 and math.isfinite(R_max)):
        raise ConfigurationError(f"R_max must be positive, got {R_max}")
    if not q >= 1.0:
        raise ConfigurationError(f"grading exponent q must be >= 1, got {q}")
    return RadialGrid(N=N, R_max=float(R_max), M=int(M), q=float(q))


class RadialField:
    """Values of a radial function at the grid nodes plus a tail exponent.

    Beyond ``R_max`` the function is modelled as ``values[-1] * (R_max/r)**p``;
    ``p = inf`` means compact support inside the grid. Instances are immutable.
    """

    __slots__ = ("grid", "values", "tail_exponent")

    def __init__(self, grid, values, tail_exponent=math.inf):
        vals = np.array(values, dtype=float)
        if vals.shape != (grid.size,):
            raise ConfigurationError(f"expected {grid.size} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("field values must be finite")
        p = float(tail_exponent)
        if not p >= 0.0:
            raise DomainError(f"tail exponent must be nonnegative, got {p}")
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "tail_exponent", p)

    def __setattr__(self, name, value):
        raise AttributeError("RadialField is immutable")

    @classmethod
    def from_function(cls, grid, fn, tail_exponent=math.inf):
        return cls(grid, fn(grid.nodes), tail_exponent)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.size), math.inf)

    @property
    def N(self):
        return self.grid.N

    @property
    def r(self):
        return self.grid.nodes

    @property
    def tail_value(self):
        return float(self.values[-1])

    def with_values(self, values, tail_exponent=None):
        p = self.tail_exponent if tail_exponent is None else tail_exponent
        return RadialField(self.grid, values, p)

    def _check(self, other):
        if not isinstance(other, RadialField):
            return False
        if other.grid != self.grid:
            raise ConfigurationError("field arithmetic requires identical grids; resample explicitly")
        return True

    def __add__(self, other):
        if self._check(other):
            return RadialField(self.grid, self.values + other.values, min(self.tail_exponent, other.tail_exponent))
        return NotImplemented

    def __sub__(self, other):
        if self._check(other):
            return RadialField(self.grid, self.values - other.values, min(self.tail_exponent, other.tail_exponent))
        return NotImplemented

    def __neg__(self):
        return RadialField(self.grid, -self.values, self.tail_exponent)

    def __mul__(self, other):
        if self._check(other):
            return RadialField(self.grid, self.values * other.values, self.tail_exponent + other.tail_exponent)
        if np.isscalar(other):
            return RadialField(self.grid, self.values * float(other), self.tail_exponent)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return RadialField(self.grid, self.values / float(other), self.tail_exponent)
        return NotImplemented

    def positive_part(self):
        return RadialField(self.grid, np.maximum(self.values, 0.0), self.tail_exponent)

    def power(self, k):
        return RadialField(self.grid, self.values**k, self.tail_exponent * k)

    def evaluate(self, r):
        """Evaluate at arbitrary radii.

        Interior points use monotone cubic interpolation in log r, points
        below the first positive node an even quadratic through the origin,
        and points beyond R_max the tail model.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0):
            raise DomainError("radii must be nonnegative")
        nodes, vals = self.grid.nodes, self.values
        out = np.empty_like(r)
        R = self.grid.R_max
        inner = r < nodes[1]
        outer = r > R
        mid = ~(inner | outer)
        if np.any(mid):
            out[mid] = _log_pchip(self.grid, vals)(np.log(r[mid]))
        if np.any(inner):
            out[inner] = vals[0] + (vals[1] - vals[0]) * (r[inner] / nodes[1]) ** 2
        if np.any(outer):
            if math.isinf(self.tail_exponent):
                out[outer] = 0.0
            else:
                out[outer] = vals[-1] * (R / r[outer]) ** self.tail_exponent
        return out

    def resample(self, grid):
        """Linear interpolation onto another grid (the explicit resampling operation)."""
        vals = np.interp(grid.nodes, self.grid.nodes, self.values)
        if grid.R_max > self.grid.R_max:
            far = grid.nodes > self.grid.R_max
            vals[far] = self.evaluate(grid.nodes[far])
        return RadialField(grid, vals, self.tail_exponent)


def _log_pchip(grid, vals):
    # flat stretches make scipy divide by zero slopes; the limit it takes is the right one
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return PchipInterpolator(np.log(grid.nodes[1:]), vals[1:], extrapolate=True)


def _tail_integral(grid, coeff, p, what):
    """Integral over |x| > R of coeff (R/r)^p, i.e. sigma coeff R^N/(p-N)."""
    N = grid.N
    if coeff == 0.0 or math.isinf(p):
        return 0.0
    if not p > N:
        raise IntegrabilityError(
            f"{what}: integrand tail ~ r^-{p:g} is not integrable in dimension {N} (need exponent > {N})",
            exponent=p,
        )
    return sphere_area(N) * coeff * grid.R_max**N / (p - N)


def integrate_volume(grid, values, tail_exponent, what="integral"):
    """Integral of a radial function over R^N with tail correction."""
    values = np.asarray(values, dtype=float)
    body = float(np.sum(grid.volume_weights * values))
    return body + _tail_integral(grid, float(values[-1]), tail_exponent, what)


def integral(f):
    """Integral of ``f`` over R^N."""
    return integrate_volume(f.grid, f.values, f.tail_exponent, "integral")


def lp_norm(f, p):
    """L^p norm over R^N, with the power-law tail integrated analytically."""
    if not p >= 1.0:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    vals = np.abs(f.values) ** p
    total = integrate_volume(f.grid, vals, p * f.tail_exponent, f"L^{p:g} norm")
    return total ** (1.0 / p)


def _padded(f):
    """Values with two ghost nodes per side: mirror images at r = 0, tail model past R_max."""
    g = f.grid
    y = f.values
    xr = 1.0 + np.arange(1, 3) / g.M
    rr = g.R_max * xr**g.q
    right = np.zeros(2) if math.isinf(f.tail_exponent) else y[-1] * (g.R_max / rr) ** f.tail_exponent
    return np.concatenate([y[2:0:-1], y, right])


def _x_derivatives(f):
    """Fourth-order central differences of f in the uniform grid parameter x."""
    yp = _padded(f)
    h = 1.0 / f.grid.M
    c = slice(2, -2)
    fx = (yp[:-4] - 8.0 * yp[1:-3] + 8.0 * yp[3:-1] - yp[4:]) / (12.0 * h)
    fxx = (-yp[:-4] + 16.0 * yp[1:-3] - 30.0 * yp[c] + 16.0 * yp[3:-1] - yp[4:]) / (12.0 * h * h)
    return fx, fxx


def derivative(f):
    """f'(r) via differences in the grid parameter; f'(0) = 0 by symmetry."""
    g = f.grid
    fx, _ = _x_derivatives(f)
    d = np.zeros_like(fx)
    d[1:] = fx[1:] / g.dr[1:]
    return d


def dirichlet_energy(f):
    """Integral of |grad f|^2 over R^N."""
    g = f.grid
    d = derivative(f)
    p = f.tail_exponent
    body = float(np.sum(g.volume_weights * d * d))
    coeff = p * f.tail_value if not math.isinf(p) else 0.0
    if coeff == 0.0:
        return body
    N, R = g.N, g.R_max
    # f'(r) = -p f(R) R^p r^(-p-1) beyond R
    if not 2.0 * p + 2.0 > N:
        raise IntegrabilityError(
            f"Dirichlet energy: gradient tail ~ r^-{p + 1:g} is not square integrable in dimension {N}",
            exponent=p,
        )
    return body + sphere_area(N) * coeff**2 * R ** (N - 2) / (2.0 * p + 2.0 - N)


def laplacian(f):
    """Radial Laplacian f'' + (N-1) f'/r; at r = 0 the even extrapolation of nearby values."""
    g = f.grid
    r, N, q = g.nodes, g.N, g.q
    fx, fxx = _x_derivatives(f)
    rx = g.dr
    rxx = q * (q - 1.0) * g.R_max * g.x[1:] ** (q - 2.0) if q != 1.0 else np.zeros(g.M)
    fr = fx[1:] / rx[1:]
    frr = (fxx[1:] - fr * rxx) / rx[1:] ** 2
    lap = np.empty(g.size)
    lap[1:] = frr + (N - 1) * fr / r[1:]
    # the Laplacian of a smooth radial function is even in r
    s1, s2 = r[1] ** 2, r[2] ** 2
    lap[0] = (s2 * lap[1] - s1 * lap[2]) / (s2 - s1)
    return RadialField(g, lap, f.tail_exponent + 2.0)
