"""Kelvin transform about origin-centred spheres and the fixed-sphere scan."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .radial import RadialField


@dataclass(frozen=True)
class SphereScan:
    lambdas: tuple
    deviations: tuple
    argmin_lambda: float
    min_deviation: float

    def to_dict(self):
        return {
            "lambdas": list(self.lambdas),
            "deviations": list(self.deviations),
            "argmin_lambda": self.argmin_lambda,
            "min_deviation": self.min_deviation,
        }


def kelvin(f, lam):
    """u_lam(r) = (lam/r)^(N-2) f(lam^2/r), sampled on the grid of ``f``.

    Off-grid values of ``f`` come from :meth:`RadialField.evaluate`. The value
    at r = 0 is the limit implied by the tail exponent of ``f``.
    """
    if not (lam > 0.0 and math.isfinite(lam)):
        raise DomainError(f"sphere radius must be positive, got {lam}")
    g = f.grid
    N, R = g.N, g.R_max
    r = g.nodes
    out = np.empty(g.size)
    out[1:] = (lam / r[1:]) ** (N - 2) * f.evaluate(lam * lam / r[1:])
    p = f.tail_exponent
    if math.isinf(p) or p > N - 2 or f.tail_value == 0.0:
        out[0] = 0.0
    elif p == N - 2:
        out[0] = f.tail_value * (R / lam) ** (N - 2)
    else:
        raise DomainError(f"Kelvin transform of a tail ~ r^-{p:g} is unbounded at the origin")
    return RadialField(g, out, N - 2)


def _window(f, lam):
    # nodes whose image lam^2/r also lies inside the grid
    r = f.grid.nodes
    R = f.grid.R_max
    return (r >= lam * lam / R) & (r <= R)


def kelvin_deviation(f, lam):
    """sup |u_lam - u| over radii where both r and lam^2/r are grid-resolved.

    The sup is relative to sup |f| over the same radii, so radii whose
    window only sees the outer tail are not favoured.
    """
    m = _window(f, lam)
    scale = np.max(np.abs(f.values[m]))
    if scale == 0.0:
        return 0.0
    diff = kelvin(f, lam).values[m] - f.values[m]
    return float(np.max(np.abs(diff)) / scale)


def sphere_invariance_scan(f, lambda_range, count=64):
    """Deviation from Kelvin invariance on a log-spaced grid of radii.

    The discrete minimiser is refined by a bounded scalar search between
    its neighbours.
    """
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not (0.0 < lo < hi and math.isfinite(hi)):
        raise DomainError(f"sphere radius range must satisfy 0 < lo < hi, got ({lo}, {hi})")
    if int(count) < 3:
        raise DomainError(f"scan needs at least 3 radii, got {count}")
    lams = np.geomspace(lo, hi, int(count))
    devs = np.array([kelvin_deviation(f, lam) for lam in lams])
    k = int(np.argmin(devs))
    a = lams[max(k - 1, 0)]
    b = lams[min(k + 1, len(lams) - 1)]
    res = optimize.minimize_scalar(
        lambda s: kelvin_deviation(f, math.exp(s)),
        bounds=(math.log(a), math.log(b)),
        method="bounded",
        options={"xatol": 1e-7},
    )
    best, best_dev = lams[k], devs[k]
    if res.fun < best_dev:
        best, best_dev = math.exp(res.x), float(res.fun)
    return SphereScan(
        lambdas=tuple(lams.tolist()),
        deviations=tuple(devs.tolist()),
        argmin_lambda=float(best),
        min_deviation=float(best_dev),
    )
