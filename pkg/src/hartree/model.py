"""Explicit solution families and their residuals in differential and integral form."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import kernels
from .constants import (
    MU,
    bubble_amplitude,
    check_dimension,
    classification_amplitudes,
    coupling,
    greens_constant,
    riesz_identity_constant,
    sobolev_constants,
    sphere_area,
)
from .errors import ConfigurationError, DomainError
from .radial import RadialField, laplacian
from .riesz import newton_potential, riesz_potential_mu4

__all__ = [
    "BubbleSpec",
    "PairField",
    "NonlocalPair",
    "Residual",
    "CutoffRates",
    "bubble",
    "classification_amplitudes",
    "groundstate_pair",
    "pde_residual",
    "integral_residual",
    "cutoff_eta",
    "cutoff_profile",
    "cutoff_rates",
]


@dataclass(frozen=True)
class BubbleSpec:
    """Scale, amplitude (None means C_N) and axial offset of a bubble."""

    delta: float
    amplitude: float = None
    center_offset: float = 0.0

    def __post_init__(self):
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise DomainError(f"bubble scale must be positive, got {self.delta}")
        if self.amplitude is not None and not self.amplitude > 0.0:
            raise DomainError(f"bubble amplitude must be positive, got {self.amplitude}")
        if not self.center_offset >= 0.0:
            raise DomainError(f"center offset must be nonnegative, got {self.center_offset}")


def bubble_values(N, delta, amplitude, r):
    return amplitude * (delta / (delta * delta + r * r)) ** ((N - 2) / 2)


def bubble(N, spec, grid):
    """Sample amplitude * (delta / (delta^2 + r^2))^((N-2)/2) on ``grid``.

    Examples
    --------
    >>> from hartree.radial import make_grid
    >>> u = bubble(6, BubbleSpec(1.0), make_grid(6, M=64))
    >>> round(float(u.values[0]), 6)
    2.155045
    """
    N = check_dimension(N)
    if grid.N != N:
        raise ConfigurationError(f"grid dimension {grid.N} differs from N={N}")
    if spec.center_offset != 0.0:
        raise DomainError("the radial bubble constructor needs center_offset = 0")
    amp = bubble_amplitude(N) if spec.amplitude is None else spec.amplitude
    return RadialField(grid, bubble_values(N, spec.delta, amp, grid.nodes), N - 2)


@dataclass(frozen=True)
class PairField:
    u: RadialField
    v: RadialField

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ConfigurationError("pair components must share one grid")

    @property
    def grid(self):
        return self.u.grid

    def scaled(self, t):
        return PairField(self.u * t, self.v * t)


@dataclass(frozen=True)
class NonlocalPair:
    """w = |x|^-4 * u^2 and g = |x|^-4 * v^2."""

    w: RadialField
    g: RadialField


def groundstate_pair(params, delta, grid):
    """(sqrt(k0) U_delta, sqrt(l0) U_delta) with the default bubble amplitude."""
    cp = coupling(params)
    U = bubble(params.N, BubbleSpec(delta), grid)
    return PairField(U * math.sqrt(cp.k0), U * math.sqrt(cp.l0))


@dataclass(frozen=True)
class Residual:
    res_u: float
    res_v: float
    trivial: bool
    aux: NonlocalPair = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {"res_u": self.res_u, "res_v": self.res_v, "trivial": self.trivial}


def _window(grid):
    return grid.nodes <= 0.5 * grid.R_max


def _rel_sup(diff, ref, mask):
    scale = np.max(np.abs(ref[mask]))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(diff[mask])) / scale)


def _potentials(pair):
    w = riesz_potential_mu4(pair.u * pair.u)
    g = riesz_potential_mu4(pair.v * pair.v)
    return NonlocalPair(w, g)


def _is_zero(pair):
    return not (np.any(pair.u.values) or np.any(pair.v.values))


def pde_residual(pair, params):
    """Relative sup residuals of the differential system on r <= R_max/2.

    Each equation's residual is normalised by the sup of the Laplacian of
    its own component.
    """
    if _is_zero(pair):
        return Residual(0.0, 0.0, True)
    m = _window(pair.grid)
    aux = _potentials(pair)
    u, v = pair.u.values, pair.v.values
    w, g = aux.w.values, aux.g.values
    lu = laplacian(pair.u).values
    lv = laplacian(pair.v).values
    ru = -lu - params.alpha1 * w * u - params.beta * g * u
    rv = -lv - params.alpha2 * g * v - params.beta * w * v
    return Residual(_rel_sup(ru, lu, m), _rel_sup(rv, lv, m), False, aux)


def integral_residual(pair, params):
    """Relative sup deviations of u, v from their integral-equation reconstructions."""
    if _is_zero(pair):
        return Residual(0.0, 0.0, True)
    m = _window(pair.grid)
    aux = _potentials(pair)
    R_N = greens_constant(params.N)
    u, v = pair.u, pair.v
    src_u = u * (aux.w * params.alpha1 + aux.g * params.beta)
    src_v = v * (aux.g * params.alpha2 + aux.w * params.beta)
    u_rec = R_N * newton_potential(src_u).values if np.any(u.values) else np.zeros(u.grid.size)
    v_rec = R_N * newton_potential(src_v).values if np.any(v.values) else np.zeros(v.grid.size)
    return Residual(
        _rel_sup(u_rec - u.values, u.values, m),
        _rel_sup(v_rec - v.values, v.values, m),
        False,
        aux,
    )


def cutoff_eta(r, rho):
    """Radial cutoff: 1 on [0, rho], 0 on [1, inf), quintic smoothstep between."""
    r = np.asarray(r, dtype=float)
    s = np.clip((r - rho) / (1.0 - rho), 0.0, 1.0)
    return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s * s)


def _cutoff_eta_prime(r, rho):
    r = np.asarray(r, dtype=float)
    s = np.clip((r - rho) / (1.0 - rho), 0.0, 1.0)
    return -30.0 * s * s * (1.0 - s) ** 2 / (1.0 - rho)


def _check_cutoff(eps, rho):
    if not 0.0 < rho < 1.0:
        raise DomainError(f"cutoff plateau radius must lie in (0, 1), got {rho}")
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"cutoff bubble scale must lie in (0, 1], got {eps}")


def cutoff_profile(N, eps, rho, grid):
    """eta * U_eps with support in the closed unit ball."""
    _check_cutoff(eps, rho)
    U = bubble(N, BubbleSpec(eps), grid)
    return RadialField(grid, U.values * cutoff_eta(grid.nodes, rho), math.inf)


def _slope(eps, vals):
    vals = np.asarray(vals, dtype=float)
    if np.all(vals == 0.0):
        return math.inf
    if np.any(vals <= 0.0):
        return math.nan
    return float(np.polyfit(np.log(eps), np.log(vals), 1)[0])


@dataclass(frozen=True)
class CutoffRates:
    """Deviations of the cutoff bubble from the extremal values, per eps.

    ``dirichlet_excess`` is |grad u_eps|^2 - S_HL^2, ``nonlocal_deficit`` and
    ``nonlocal_excess`` the positive and negative parts of S_HL^2 - D(u_eps),
    and ``nehari_norm_sq`` the norm of the Nehari-scaled profile.
    """

    N: int
    rho: float
    eps: tuple
    dirichlet_excess: tuple
    nonlocal_deficit: tuple
    nonlocal_excess: tuple
    nehari_norm_sq: tuple
    s_hl_squared: float
    dirichlet_slope: float
    deficit_slope: float
    excess_slope: float

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _quad(fn, a, b, points=None):
    val, _ = integrate.quad(fn, a, b, epsabs=0.0, epsrel=1e-12, limit=500, points=points)
    return val


def cutoff_rates(N, rho=0.5, eps_values=None):
    """Evaluate the cutoff-bubble energy deviations by adaptive quadrature on the exact profiles."""
    N = check_dimension(N)
    eps_values = tuple(np.geomspace(0.02, 0.2, 7)) if eps_values is None else tuple(eps_values)
    for e in eps_values:
        _check_cutoff(e, rho)
    C = bubble_amplitude(N)
    sig = sphere_area(N)
    s2 = sobolev_constants(N).S_HL ** 2
    I2 = riesz_identity_constant(N, 2)
    k = (N - 2) / 2
    ang = sphere_area(N - 1)

    def kernel(r, s):
        mx, mn = max(r, s), min(r, s)
        if N == 6:
            return sig / mx**4
        return ang * float(kernels.angular_integral(np.array([mn / mx]), N)[0]) / mx**4

    dir_ex, deficit = [], []
    for eps in eps_values:
        U = lambda r: C * (eps / (eps * eps + r * r)) ** k
        dU = lambda r: -(N - 2) * C * eps**k * r * (eps * eps + r * r) ** (-N / 2)
        eta = lambda r: float(cutoff_eta(r, rho))
        deta = lambda r: float(_cutoff_eta_prime(r, rho))

        def grad_diff(r):
            du = eta(r) * dU(r) + deta(r) * U(r)
            return (du * du - dU(r) ** 2) * r ** (N - 1)

        ex = _quad(grad_diff, rho, 1.0) - _quad(lambda r: dU(r) ** 2 * r ** (N - 1), 1.0, math.inf)
        dir_ex.append(sig * ex)

        # D(U^2,U^2) - D(u^2,u^2) = int e W + int u^2 K e, with e = (1 - eta^2) U^2 >= 0
        W = lambda r: C * C * I2 * eps * eps / (eps * eps + r * r) ** 2
        e = lambda s: (1.0 - eta(s) ** 2) * U(s) ** 2
        t1 = _quad(lambda r: e(r) * W(r) * r ** (N - 1), rho, 1.0) + _quad(
            lambda r: U(r) ** 2 * W(r) * r ** (N - 1), 1.0, math.inf
        )

        def Ke(r):
            inner = lambda s: kernel(r, s) * e(s) * s ** (N - 1)
            pts = [r] if rho < r < 1.0 else None
            return _quad(inner, rho, 1.0, points=pts) + _quad(
                lambda s: kernel(r, s) * U(s) ** 2 * s ** (N - 1), 1.0, math.inf
            )

        t2 = _quad(lambda r: (eta(r) * U(r)) ** 2 * Ke(r) * r ** (N - 1), 0.0, 1.0, points=[rho])
        deficit.append(sig * (t1 + t2))

    dir_ex = np.array(dir_ex)
    deficit = np.array(deficit)
    d_raw = s2 - deficit
    excess = np.maximum(-deficit, 0.0)
    A = s2 + dir_ex
    nehari = A * A / d_raw
    return CutoffRates(
        N=N,
        rho=float(rho),
        eps=tuple(float(e) for e in eps_values),
        dirichlet_excess=tuple(dir_ex.tolist()),
        nonlocal_deficit=tuple(np.maximum(deficit, 0.0).tolist()),
        nonlocal_excess=tuple(excess.tolist()),
        nehari_norm_sq=tuple(nehari.tolist()),
        s_hl_squared=s2,
        dirichlet_slope=_slope(eps_values, dir_ex),
        deficit_slope=_slope(eps_values, np.maximum(deficit, 0.0)),
        excess_slope=_slope(eps_values, excess),
    )
