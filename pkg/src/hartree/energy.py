"""Energy functionals, Nehari scaling, barycenter/concentration and the splitting defect."""

import math
from dataclasses import dataclass

import numpy as np

from .constants import coupling, energy_levels, hls_constant, sobolev_constants
from .errors import ConfigurationError, DegenerateInputError, DomainError
from .radial import RadialField, dirichlet_energy, integrate_volume, lp_norm
from .riesz import nonlocal_double, riesz_potential_mu4


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float
    potential: float
    nonlocal_quartic: float
    j_value: float
    nehari_t: float

    def to_dict(self):
        return dict(self.__dict__)


def _quartic(pair, params):
    up = pair.u.positive_part()
    vp = pair.v.positive_part()
    u2, v2 = up * up, vp * vp
    total = 0.0
    if np.any(u2.values):
        total += params.alpha1 * nonlocal_double(u2, u2)
    if np.any(v2.values):
        total += params.alpha2 * nonlocal_double(v2, v2)
    if np.any(u2.values) and np.any(v2.values):
        total += 2.0 * params.beta * nonlocal_double(u2, v2)
    return total


def potential_term(pair, V1, V2):
    """Integral of V1 u^2 + V2 v^2."""
    total = 0.0
    for V, f in ((V1, pair.u), (V2, pair.v)):
        if V is None:
            continue
        if V.grid != f.grid:
            raise ConfigurationError("potential and field live on different grids")
        if np.any(V.values < 0.0):
            raise DomainError("potentials must be nonnegative")
        prod = V * f * f
        if np.any(prod.values):
            total += integrate_volume(f.grid, prod.values, prod.tail_exponent, "potential term")
    return total


def _breakdown(dirichlet, potential, quartic):
    j = 0.5 * (dirichlet + potential) - 0.25 * quartic
    t = math.sqrt((dirichlet + potential) / quartic) if quartic > 0.0 else None
    return EnergyBreakdown(dirichlet, potential, quartic, j, t)


def j_potentials(pair, params, V1=None, V2=None):
    """Energy with potentials: (|grad u|^2 + |grad v|^2 + V terms)/2 - quartic/4."""
    dirichlet = dirichlet_energy(pair.u) + dirichlet_energy(pair.v)
    pot = potential_term(pair, V1, V2)
    return _breakdown(dirichlet, pot, _quartic(pair, params))


def j_infty(pair, params):
    """Energy without potentials."""
    return j_potentials(pair, params)


def nehari_scale(pair, params, V1=None, V2=None):
    """t > 0 with t * pair on the Nehari manifold: t^2 = (dirichlet + potential) / quartic."""
    b = j_potentials(pair, params, V1, V2)
    if not b.nonlocal_quartic > 0.0:
        raise DegenerateInputError("Nehari scaling needs a nonzero quartic term")
    return b.nehari_t


@dataclass(frozen=True)
class ConcentrationReport:
    beta_axial: float
    gamma: float

    def to_dict(self):
        return dict(self.__dict__)


def barycenter_gamma(amplitudes, profile, center_offset, params, delta=1.0, n_theta=128):
    """Barycenter (axial component) and concentration of a shifted axisymmetric pair.

    The pair is (a_u w_delta(|x - z e1|), a_v w_delta(|x - z e1|)) with
    w_delta(r) = delta^(-(N-2)/2) w(r/delta) and z = ``center_offset``. Its
    nonlocal density is radial about z e1 and is evaluated at scale one,
    then pulled back along x = delta y + z e1.
    """
    a_u, a_v = (float(a) for a in amplitudes)
    if a_u < 0.0 or a_v < 0.0 or (a_u == 0.0 and a_v == 0.0):
        raise DomainError("amplitudes must be nonnegative and not both zero")
    if not delta > 0.0:
        raise DomainError(f"scale must be positive, got {delta}")
    if not center_offset >= 0.0:
        raise DomainError(f"center offset must be nonnegative, got {center_offset}")
    g = profile.grid
    N = g.N
    w2 = profile.positive_part()
    w2 = w2 * w2
    dens = w2 * riesz_potential_mu4(w2)
    # amplitudes factor out of the density and cancel in both quotients
    c = params.alpha1 * a_u**4 + params.alpha2 * a_v**4 + 2.0 * params.beta * a_u**2 * a_v**2
    rho = c * dens.values
    if not math.isinf(dens.tail_exponent) and dens.tail_value != 0.0:
        raise ConfigurationError("barycenter quadrature needs a compactly supported profile")
    th, wth = np.polynomial.legendre.leggauss(int(n_theta))
    th = 0.5 * np.pi * (th + 1.0)
    wth = 0.5 * np.pi * wth * np.sin(th) ** (N - 2)
    cos = np.cos(th)
    # volume weights of the shell at radius t; sigma_(N-2) is common and cancels
    wt = g.trap * g.dr * g.nodes ** (N - 1) * rho
    mass = float(np.sum(wt)) * float(np.sum(wth))
    if mass <= 0.0:
        raise DegenerateInputError("profile has zero nonlocal norm")
    t = delta * g.nodes[:, None]
    z = float(center_offset)
    x1 = t * cos[None, :] + z
    xn = np.sqrt(t * t + 2.0 * z * t * cos[None, :] + z * z)
    inv = 1.0 / (1.0 + xn)
    beta = float(np.sum(wt[:, None] * wth[None, :] * x1 * inv)) / mass
    # |x/(1+|x|) - beta e1|
    dist2 = (xn * inv) ** 2 - 2.0 * beta * x1 * inv + beta * beta
    gamma = float(np.sum(wt[:, None] * wth[None, :] * np.sqrt(np.maximum(dist2, 0.0)))) / mass
    return ConcentrationReport(beta_axial=beta, gamma=gamma)


def potential_sweep(V, profile, deltas):
    """Integral of V w_delta^2 for each delta, with w_delta = delta^(-(N-2)/2) w(r/delta)."""
    if V.grid.N != profile.grid.N:
        raise ConfigurationError("potential and profile dimensions differ")
    N = profile.grid.N
    lp_norm(V, N / 2)
    if np.any(V.values < 0.0):
        raise DomainError("potential must be nonnegative")
    g = profile.grid
    w2 = profile * profile
    out = []
    for d in deltas:
        if not d > 0.0:
            raise DomainError(f"scales must be positive, got {d}")
        vals = V.evaluate(d * g.nodes) * w2.values
        # the tail of the integrand in tau combines both decay rates
        p = w2.tail_exponent + (V.tail_exponent if d * g.R_max > V.grid.R_max else 0.0)
        out.append(d * d * integrate_volume(g, vals, p, "potential sweep"))
    return out


def quartic_plus(f):
    """D(f+^2, f+^2)."""
    fp = f.positive_part()
    f2 = fp * fp
    if not np.any(f2.values):
        return 0.0
    return nonlocal_double(f2, f2)


def brezis_lieb_defect(u, phi):
    """D+(u + phi) - D+(phi) - D+(u) for the scalar quartic term with positive parts."""
    if u.grid != phi.grid:
        raise ConfigurationError("fields must share one grid")
    return quartic_plus(u + phi) - quartic_plus(phi) - quartic_plus(u)


@dataclass(frozen=True)
class BoundChain:
    bound: float
    window_hi: float
    holds: bool
    norm_sq: float
    weighted_norms: float

    def to_dict(self):
        return dict(self.__dict__)


def bound_chain(params, w_norm_sq, v1norm, v2norm):
    """(k0+l0)/4 |w|^2 S_HL^-2 (S_HL + weighted potential norms)^2 against the window top."""
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    N = params.N
    S_HL = sobolev_constants(N).S_HL
    C = hls_constant(N, 4)
    den = 2.0 * b - a1 - a2
    weighted = ((b - a2) * v1norm + (b - a1) * v2norm) / (den * math.sqrt(C))
    cp = coupling(params)
    bound = 0.25 * cp.fmin * w_norm_sq * S_HL**-2 * (S_HL + weighted) ** 2
    hi = energy_levels(params).window[1]
    return BoundChain(bound=bound, window_hi=hi, holds=bool(bound < hi), norm_sq=w_norm_sq, weighted_norms=weighted)


def nehari_normalized_norm(profile):
    """|t w|^2 = |grad w|^4 / D(w^2, w^2) for the profile scaled onto the scalar Nehari set."""
    A = dirichlet_energy(profile)
    D = quartic_plus(profile)
    if not D > 0.0:
        raise DegenerateInputError("profile has zero nonlocal norm")
    return A * A / D


def dilate(f, s):
    """f_s(r) = s^((N-2)/2) f(s r), the critical dilation."""
    g = f.grid
    return RadialField(g, s ** ((g.N - 2) / 2) * f.evaluate(s * g.nodes), f.tail_exponent)


__all__ = [
    "EnergyBreakdown",
    "ConcentrationReport",
    "BoundChain",
    "j_infty",
    "j_potentials",
    "nehari_scale",
    "potential_term",
    "barycenter_gamma",
    "potential_sweep",
    "brezis_lieb_defect",
    "quartic_plus",
    "bound_chain",
    "nehari_normalized_norm",
    "dilate",
]
