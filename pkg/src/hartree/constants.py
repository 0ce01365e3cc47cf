"""Closed-form constants of the coupled critical Hartree system with kernel |x|^-4.

All functions are pure. Gamma values come from :func:`math.gamma`, and the
Sobolev constant is the Rayleigh quotient of the extremal profile evaluated by
adaptive quadrature.
"""

import math
from dataclasses import asdict, dataclass, field
from numbers import Integral

from scipy import integrate, optimize

from .errors import DimensionError, DomainError, ParameterError, ToleranceError

MU = 4


def sphere_area(n):
    """Surface area of the unit sphere S^(n-1) in R^n."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def check_dimension(N, minimum=5):
    if isinstance(N, bool) or not isinstance(N, Integral):
        raise DimensionError(f"dimension must be an integer, got {N!r}")
    if N < minimum:
        raise DimensionError(f"dimension must be at least {minimum}, got {N}")
    return int(N)


@dataclass(frozen=True)
class SystemParams:
    """Dimension and couplings, restricted to beta > max(alpha1, alpha2) > 0."""

    N: int
    alpha1: float
    alpha2: float
    beta: float
    mu: int = MU

    def __post_init__(self):
        object.__setattr__(self, "N", check_dimension(self.N))
        for name in ("alpha1", "alpha2", "beta"):
            val = float(getattr(self, name))
            if not math.isfinite(val) or val <= 0.0:
                raise ParameterError(f"{name} must be positive and finite, got {val}")
            object.__setattr__(self, name, val)
        if self.mu != MU:
            raise ParameterError(f"only mu = {MU} is supported, got {self.mu}")
        if not self.beta > max(self.alpha1, self.alpha2):
            raise ParameterError(
                f"need beta > max(alpha1, alpha2); got beta={self.beta}, "
                f"alpha1={self.alpha1}, alpha2={self.alpha2}"
            )

    def to_dict(self):
        return asdict(self)


def hls_constant(N, mu=MU):
    """Sharp Hardy-Littlewood-Sobolev constant C(N, mu).

    Examples
    --------
    >>> round(hls_constant(6, 4), 5)
    6.4397
    """
    if not 0.0 < mu < N:
        raise DomainError(f"mu must lie in (0, N) = (0, {N}), got {mu}")
    g = math.gamma
    return (
        math.pi ** (mu / 2)
        * g(N / 2 - mu / 2)
        / g(N - mu / 2)
        * (g(N / 2) / g(N)) ** (-1.0 + mu / N)
    )


def riesz_identity_constant(N, s):
    """I(s) with  int |x-y|^(-2s) (1+|y|^2)^(s-N) dy = I(s) (1+|x|^2)^(-s)."""
    if not 0.0 < s < N / 2:
        raise DomainError(f"s must lie in (0, N/2) = (0, {N / 2}), got {s}")
    return math.pi ** (N / 2) * math.gamma((N - 2 * s) / 2) / math.gamma(N - s)


def greens_constant(N):
    """R_N, the constant of the fundamental solution R_N |x|^(2-N) of -Laplace."""
    N = check_dimension(N)
    return 0.25 * math.pi ** (-N / 2) * math.gamma((N - 2) / 2)


@dataclass(frozen=True)
class SobolevConstants:
    S: float
    S_HL: float


def _quad(fn, tol=1e-13):
    val, err = integrate.quad(fn, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=400)
    val2, err2 = integrate.quad(fn, 1.0, math.inf, epsabs=0.0, epsrel=tol, limit=400)
    total = val + val2
    achieved = (err + err2) / abs(total)
    if achieved > 1e-10:
        raise ToleranceError(
            f"Sobolev quadrature reached only relative accuracy {achieved:.2e}",
            achieved=achieved,
        )
    return total


def sobolev_constants(N):
    """S as the Rayleigh quotient of (1+r^2)^(-(N-2)/2), and S_HL = S/sqrt(C(N,4))."""
    N = check_dimension(N)
    sig = sphere_area(N)
    grad = sig * _quad(lambda r: (N - 2) ** 2 * r ** (N + 1) * (1 + r * r) ** (-N))
    mass = sig * _quad(lambda r: r ** (N - 1) * (1 + r * r) ** (-N))
    S = grad / mass ** ((N - 2) / N)
    return SobolevConstants(S=S, S_HL=S / math.sqrt(hls_constant(N, MU)))


@dataclass(frozen=True)
class Coupling:
    k0: float
    l0: float
    fmin: float
    tstar: float


def coupling_profile(params, t):
    """f(t) = (t+1)^2 / (alpha1 t^2 + 2 beta t + alpha2)."""
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    return (t + 1.0) ** 2 / (a1 * t * t + 2.0 * b * t + a2)


def coupling(params):
    """k0, l0 and the minimiser of the coupling profile f over t >= 0.

    The minimiser is located numerically by bounded Brent search and then
    polished on the sign change of f'; it coincides with k0/l0.
    """
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    det = b * b - a1 * a2
    k0 = (b - a2) / det
    l0 = (b - a1) / det
    f = lambda t: coupling_profile(params, t)
    hi = 10.0 * max(1.0, b / a1)
    # f is unimodal with f -> 1/alpha1 from below, so grow the bracket until it rises
    while f(hi) < f(0.5 * hi):
        hi *= 2.0
    res = optimize.minimize_scalar(f, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-10})
    tstar = float(res.x)
    # a flat minimum pins x only to ~sqrt(eps); polish on the sign change of f'
    df = lambda t: (a1 * t * t + 2.0 * b * t + a2) - (t + 1.0) * (a1 * t + b)
    lo, up = 0.5 * tstar, min(2.0 * tstar + 1e-3, hi)
    if df(lo) * df(up) < 0.0:
        tstar = optimize.brentq(df, lo, up, xtol=1e-15, rtol=1e-15)
    return Coupling(k0=k0, l0=l0, fmin=k0 + l0, tstar=tstar)


@dataclass(frozen=True)
class EnergyLevels:
    c_infty: float
    c1_infty: float
    c2_infty: float
    window: tuple


def energy_levels(params):
    """Ground-state level c_infty, scalar levels and the compactness window."""
    s2 = sobolev_constants(params.N).S_HL ** 2
    cp = coupling(params)
    c = 0.25 * cp.fmin * s2
    c1 = s2 / (4.0 * params.alpha1)
    c2 = s2 / (4.0 * params.alpha2)
    return EnergyLevels(c_infty=c, c1_infty=c1, c2_infty=c2, window=(c, min(c1, c2, 2.0 * c)))


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    lhs: float
    rhs: float


def admissibility(params, v1norm, v2norm):
    """Smallness test on the L^(N/2) norms of the potentials; holds iff 0 < lhs < rhs."""
    if not (v1norm >= 0.0 and v2norm >= 0.0):
        raise DomainError(f"potential norms must be nonnegative, got {v1norm}, {v2norm}")
    a1, a2, b = params.alpha1, params.alpha2, params.beta
    C = hls_constant(params.N, MU)
    S_HL = sobolev_constants(params.N).S_HL
    den = 2.0 * b - a1 - a2
    lhs = ((b - a2) * v1norm + (b - a1) * v2norm) / (den * math.sqrt(C))
    det = b * b - a1 * a2
    m = min(math.sqrt(det / (a1 * den)), math.sqrt(det / (a2 * den)), math.sqrt(2.0))
    rhs = (m - 1.0) * S_HL
    return Admissibility(admissible=bool(0.0 < lhs < rhs), lhs=lhs, rhs=rhs)


def bubble_amplitude(N):
    """C_N, the amplitude making (1+r^2)^(-(N-2)/2) solve the scalar equation."""
    N = check_dimension(N)
    S = sobolev_constants(N).S
    C = hls_constant(N, MU)
    return S ** (-(N - 4) / 4) * C ** -0.5 * (N * (N - 2)) ** ((N - 2) / 4)


def classification_amplitudes(params):
    """Amplitudes (C1, C2) of the classified positive pairs."""
    N = params.N
    base = greens_constant(N) * riesz_identity_constant(N, 2) * riesz_identity_constant(N, (N - 2) / 2)
    cp = coupling(params)
    return math.sqrt(cp.k0) / math.sqrt(base), math.sqrt(cp.l0) / math.sqrt(base)


FORMULAS = {
    "C_Nmu": "pi^(mu/2) G(N/2-mu/2)/G(N-mu/2) (G(N/2)/G(N))^(-1+mu/N)",
    "I_s": "pi^(N/2) G((N-2s)/2)/G(N-s), s=2",
    "R_N": "pi^(-N/2) G((N-2)/2)/4",
    "S": "|grad U|_2^2 / |U|_{2N/(N-2)}^2, U=(1+r^2)^(-(N-2)/2)",
    "S_HL": "S/sqrt(C(N,4))",
    "k0": "(beta-alpha2)/(beta^2-alpha1 alpha2)",
    "l0": "(beta-alpha1)/(beta^2-alpha1 alpha2)",
    "C_N_amp": "S^(-(N-4)/4) C(N,4)^(-1/2) (N(N-2))^((N-2)/4)",
    "C1": "sqrt(k0/(R_N I(2) I((N-2)/2)))",
    "C2": "sqrt(l0/(R_N I(2) I((N-2)/2)))",
    "c_infty": "(k0+l0) S_HL^2/4",
    "ci_infty": "S_HL^2/(4 alpha_i)",
    "window": "(c_infty, min(c1_infty, c2_infty, 2 c_infty))",
}


@dataclass(frozen=True)
class ConstantsReport:
    C_Nmu: float
    I_s: float
    R_N: float
    S: float
    S_HL: float
    k0: float
    l0: float
    fmin: float
    tstar: float
    C_N_amp: float
    C1: float
    C2: float
    c_infty: float
    c1_infty: float
    c2_infty: float
    window_lo: float
    window_hi: float
    formulas: dict = field(default_factory=lambda: dict(FORMULAS))

    @property
    def s_hl_squared(self):
        return self.S_HL ** 2

    def to_dict(self):
        out = asdict(self)
        out["s_hl_squared"] = self.s_hl_squared
        return out


def constants_report(params):
    """Every constant of the system for ``params`` in one report."""
    N = params.N
    sob = sobolev_constants(N)
    cp = coupling(params)
    lv = energy_levels(params)
    C1, C2 = classification_amplitudes(params)
    return ConstantsReport(
        C_Nmu=hls_constant(N, MU),
        I_s=riesz_identity_constant(N, 2),
        R_N=greens_constant(N),
        S=sob.S,
        S_HL=sob.S_HL,
        k0=cp.k0,
        l0=cp.l0,
        fmin=cp.fmin,
        tstar=cp.tstar,
        C_N_amp=bubble_amplitude(N),
        C1=C1,
        C2=C2,
        c_infty=lv.c_infty,
        c1_infty=lv.c1_infty,
        c2_infty=lv.c2_infty,
        window_lo=lv.window[0],
        window_hi=lv.window[1],
    )
