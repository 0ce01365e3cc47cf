"""Ground states by Nehari-projected, Sobolev-preconditioned gradient descent.

On the Nehari set the energy equals F = (A + P)^2 / (4 Q), with A the
Dirichlet form, P the potential term and Q the quartic nonlocal term. F
is invariant under amplitude scaling, so every iterate is rescaled onto
the Nehari set, truncated to its positive part and, optionally, dilated to
a fixed normalisation. Armijo backtracking acts on that whole composition,
so accepted steps never increase F.

The discrete Dirichlet form is the exact P1 form on the grid plus the
energy of the harmonic exterior extension; its banded matrix is also the
preconditioner.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

from .constants import SystemParams, energy_levels, sphere_area
from .energy import j_infty, j_potentials
from .errors import ConfigurationError, ConvergenceError, DomainError
from .model import PairField
from .radial import RadialField, lp_norm
from .riesz import kernel_matrix

SCALE_PINS = ("auto", "value_at_zero", "dirichlet_norm", "none")
ESCAPE_DELTA = (0.05, 20.0)
ESCAPE_GAP = 0.01


@dataclass(frozen=True)
class SolveOptions:
    """Iteration controls.

    ``scale_pin`` fixes the dilation after each step: ``value_at_zero``
    keeps the value at the origin, ``dirichlet_norm`` keeps half of the
    Dirichlet energy inside the unit ball, ``none`` leaves it free, and
    ``auto`` pins at the origin unless potentials are present.
    ``seed_width`` is the length scale of the Gaussian seed. Escape is
    reported once the fitted scale has left ``escape_delta`` with the
    energy gap below ``escape_gap`` on ``patience`` consecutive iterates.
    """

    max_iters: int = 2000
    step0: float = 0.1
    energy_tol: float = 1e-10
    scale_pin: str = "auto"
    record_trace: bool = True
    patience: int = 5
    escape_delta: tuple = ESCAPE_DELTA
    escape_gap: float = ESCAPE_GAP
    seed_width: float = 0.3

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ConfigurationError("max_iters must be at least 1")
        if not (self.step0 > 0.0 and self.energy_tol > 0.0 and self.seed_width > 0.0):
            raise ConfigurationError("step0, energy_tol and seed_width must be positive")
        if int(self.patience) < 1:
            raise ConfigurationError("patience must be at least 1")
        if self.scale_pin not in SCALE_PINS:
            raise ConfigurationError(f"scale_pin must be one of {SCALE_PINS}, got {self.scale_pin!r}")


@dataclass
class SolveTrace:
    iters: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    nehari_t: list = field(default_factory=list)
    delta_fit: list = field(default_factory=list)
    step: list = field(default_factory=list)

    def append(self, it, energy, t, delta, step):
        self.iters.append(it)
        self.energy.append(energy)
        self.nehari_t.append(t)
        self.delta_fit.append(delta)
        self.step.append(step)

    def __len__(self):
        return len(self.iters)

    def rows(self):
        return list(zip(self.iters, self.energy, self.nehari_t, self.delta_fit))


@dataclass(frozen=True)
class BubbleFit:
    delta: float
    amplitude: float
    rel_err: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SolveResult:
    pair: PairField
    energy: float
    trace: SolveTrace
    iterations: int
    converged: bool
    escaped: bool
    fit: BubbleFit
    c_infty: float

    @property
    def field(self):
        return self.pair.u

    def summary(self):
        return {
            "energy": self.energy,
            "iterations": self.iterations,
            "converged": self.converged,
            "escaped": self.escaped,
            "fit": self.fit.to_dict(),
            "c_infty": self.c_infty,
            "energy_gap": (self.energy - self.c_infty) / self.c_infty,
        }


def fit_bubble(f):
    """Least-squares fit of log f by a log-bubble a (delta/(delta^2 + r^2))^((N-2)/2) on r <= R_max/2."""
    g = f.grid
    N = g.N
    m = g.nodes <= 0.5 * g.R_max
    r, y = g.nodes[m], f.values[m]
    if np.any(y <= 0.0):
        raise DomainError("bubble fit needs a positive field on r <= R_max/2")
    k = (N - 2) / 2
    # initial guess: f(delta)/f(0) = 2^-k
    target = y[0] * 2.0**-k
    idx = int(np.argmax(y < target)) if np.any(y < target) else len(y) - 1
    d0 = max(float(r[max(idx, 1)]), float(r[1]))
    a0 = y[0] * d0**k
    ly = np.log(y)

    def resid(p):
        la, ld = p
        d = math.exp(ld)
        return la + k * (ld - np.log(d * d + r * r)) - ly

    def jac(p):
        d2 = math.exp(2.0 * p[1])
        return np.column_stack([np.ones_like(r), k * (1.0 - 2.0 * d2 / (d2 + r * r))])

    sol = optimize.least_squares(
        resid, [math.log(a0), math.log(d0)], jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    a, d = math.exp(sol.x[0]), math.exp(sol.x[1])
    fit = a * (d / (d * d + r * r)) ** k
    return BubbleFit(delta=d, amplitude=a, rel_err=float(np.max(np.abs(y - fit)) / np.max(fit)))


class _Problem:
    """Discrete functional for one or two components on a fixed grid."""

    def __init__(self, grid, alphas, beta, V=None):
        self.grid = grid
        self.ncomp = len(alphas)
        self.alphas = alphas
        self.beta = beta
        N, r = grid.N, grid.nodes
        sig = sphere_area(N)
        h = np.diff(r)
        a = sig * (r[1:] ** N - r[:-1] ** N) / (N * h * h)
        diag = np.zeros(grid.size)
        diag[:-1] += a
        diag[1:] += a
        diag[-1] += sig * (N - 2) * grid.R_max ** (N - 2)
        self.S_diag = diag
        self.S_off = -a
        self.W = grid.volume_weights
        self.V = [np.zeros(grid.size) if v is None else np.asarray(v.values, dtype=float) for v in (V or [None] * self.ncomp)]
        self.km = kernel_matrix(grid, 4)
        band = np.zeros((2, grid.size))
        band[0] = diag
        band[1, :-1] = -a
        self._band = band

    def stiff(self, u):
        out = self.S_diag * u
        out[:-1] += self.S_off * u[1:]
        out[1:] += self.S_off * u[:-1]
        return out

    def precondition(self, g):
        return linalg.solveh_banded(self._band, g, lower=True, check_finite=False)

    def parts(self, comps):
        """A + P, Q and the ingredients of their gradients."""
        Au = [self.stiff(c) + self.W * V * c for c, V in zip(comps, self.V)]
        AP = float(sum(np.sum(c * a) for c, a in zip(comps, Au)))
        pos = [np.maximum(c, 0.0) for c in comps]
        sq = [p * p for p in pos]
        pot = [self.km.apply_grid(s) for s in sq]
        if self.ncomp == 1:
            fields = [self.alphas[0] * pot[0]]
        else:
            fields = [
                self.alphas[0] * pot[0] + self.beta * pot[1],
                self.alphas[1] * pot[1] + self.beta * pot[0],
            ]
        Q = float(sum(np.sum(self.W * s * f) for s, f in zip(sq, fields)))
        return AP, Q, Au, pos, fields

    def value(self, comps):
        AP, Q, *_ = self.parts(comps)
        return AP * AP / (4.0 * Q), AP, Q

    def gradient(self, comps):
        AP, Q, Au, pos, fields = self.parts(comps)
        F = AP * AP / (4.0 * Q)
        grads = [AP / Q * a - AP * AP / (Q * Q) * self.W * p * f for a, p, f in zip(Au, pos, fields)]
        return F, AP, Q, grads


def _dilate_values(grid, values, s, tail):
    N = grid.N
    f = RadialField(grid, values, tail)
    return s ** ((N - 2) / 2) * f.evaluate(s * grid.nodes)


class _Pin:
    def __init__(self, kind, grid, comps, problem):
        self.kind = kind
        self.grid = grid
        self.problem = problem
        self.target = self._measure(comps) if kind != "none" else None

    def _measure(self, comps):
        if self.kind == "value_at_zero":
            return math.sqrt(sum(float(c[0]) ** 2 for c in comps))
        # fraction of the Dirichlet energy inside the unit ball
        return self._inner_fraction(comps)

    def _inner_fraction(self, comps):
        r = self.grid.nodes
        a = -self.problem.S_off
        inner = r[1:] <= 1.0
        tot = sum(float(np.sum(a * np.diff(c) ** 2)) for c in comps)
        ins = sum(float(np.sum((a * np.diff(c) ** 2)[inner])) for c in comps)
        return ins / tot

    def apply(self, comps):
        if self.kind == "none":
            return comps
        N = self.grid.N
        tail = N - 2
        if self.kind == "value_at_zero":
            cur = self._measure(comps)
            if cur <= 0.0:
                return comps
            s = (self.target / cur) ** (2.0 / (N - 2))
        else:
            s = self._solve_fraction(comps)
        if abs(s - 1.0) < 1e-15:
            return comps
        return [_dilate_values(self.grid, c, s, tail) for c in comps]

    def _solve_fraction(self, comps):
        fn = lambda ls: self._inner_fraction([_dilate_values(self.grid, c, math.exp(ls), self.grid.N - 2) for c in comps]) - self.target
        f0 = fn(0.0)
        if abs(f0) < 1e-14:
            return 1.0
        lo, hi = (-0.5, 0.0) if f0 > 0 else (0.0, 0.5)
        for _ in range(20):
            if fn(lo) * fn(hi) < 0:
                break
            lo, hi = lo - 0.5, hi + 0.5
        return math.exp(optimize.brentq(fn, lo, hi, xtol=1e-13))


def _seed(grid, ncomp, N, width=1.0):
    r = grid.nodes / width
    base = np.exp(-0.25 * r * r) + 1e-3 * (1.0 + r * r) ** (-(N - 2) / 2)
    return [base.copy() for _ in range(ncomp)]


def _run(problem, comps, opts, pin_kind, c_ref, detect_escape):
    grid = problem.grid
    N = grid.N
    tail = N - 2

    def nehari(cs):
        _, AP, Q = problem.value(cs)
        t = math.sqrt(AP / Q)
        return [c * t for c in cs], t

    def fitted(cs):
        mag = np.sqrt(sum(c * c for c in cs))
        try:
            return fit_bubble(RadialField(grid, mag, tail)).delta
        except (DomainError, ValueError):
            return math.nan

    comps = [np.maximum(c, 0.0) for c in comps]
    comps, t0 = nehari(comps)
    pin = _Pin(pin_kind, grid, comps, problem)
    comps = pin.apply(comps)
    F, AP, Q, grads = problem.gradient(comps)
    trace = SolveTrace()
    trace.append(0, F, t0, fitted(comps), 0.0)
    step = opts.step0
    quiet = outside = 0
    converged = escaped = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        dirs = [problem.precondition(g) for g in grads]
        slope = float(sum(np.sum(g * d) for g, d in zip(grads, dirs)))
        if not slope > 0.0:
            converged = True
            break
        accepted = False
        for _ in range(40):
            trial = [np.maximum(c - step * d, 0.0) for c, d in zip(comps, dirs)]
            if not any(np.any(c) for c in trial):
                step *= 0.5
                continue
            trial, t = nehari(trial)
            trial = pin.apply(trial)
            F_new, *_ = problem.value(trial)
            if F_new <= F - 1e-4 * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no admissible decrease at machine precision: stationary
            converged = True
            it -= 1
            break
        dec = (F - F_new) / F
        comps = trial
        F, AP, Q, grads = problem.gradient(comps)
        delta = fitted(comps)
        trace.append(it, F, t, delta, step)
        step = min(step * 2.0, 1e3)
        quiet = quiet + 1 if dec < opts.energy_tol else 0
        if detect_escape:
            lo, hi = opts.escape_delta
            gap = (F - c_ref) / c_ref
            if math.isfinite(delta) and not (lo <= delta <= hi) and gap < opts.escape_gap:
                outside += 1
            else:
                outside = 0
            if outside >= opts.patience:
                escaped = True
                break
        if quiet >= opts.patience:
            converged = True
            break
    return comps, trace, it, converged, escaped


def _check_potential(V, grid, name):
    if V is None:
        return None
    if V.grid != grid:
        raise ConfigurationError(f"{name} lives on a different grid")
    if np.any(V.values < 0.0):
        raise DomainError(f"{name} must be nonnegative")
    lp_norm(V, grid.N / 2)
    return V


def _resolve_pin(opts, has_potential):
    if opts.scale_pin == "auto":
        return "none" if has_potential else "value_at_zero"
    return opts.scale_pin


def solve_scalar(alpha, N, grid, opts=None):
    """Positive ground state of -Lap u = alpha (|x|^-4 * u+^2) u+; target energy S_HL^2/(4 alpha)."""
    opts = opts or SolveOptions()
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if grid.N != N:
        raise ConfigurationError(f"grid dimension {grid.N} differs from N={N}")
    # the scalar problem is the diagonal of any admissible coupled system
    params = SystemParams(N, alpha, alpha, 2.0 * alpha)
    problem = _Problem(grid, (float(alpha),), 0.0)
    c_ref = energy_levels(params).c1_infty
    comps, trace, it, converged, _ = _run(problem, _seed(grid, 1, N, opts.seed_width), opts, _resolve_pin(opts, False), c_ref, False)
    u = RadialField(grid, comps[0], N - 2)
    zero = RadialField.zeros(grid)
    energy = j_infty(PairField(u, zero), params).j_value
    if not converged:
        raise ConvergenceError(f"scalar solve did not converge in {opts.max_iters} iterations", trace=trace)
    return SolveResult(PairField(u, zero), energy, trace, it, converged, False, fit_bubble(u), c_ref)


def solve_coupled(params, grid, opts=None, V1=None, V2=None):
    """Coupled ground state; with potentials, reports escape of the minimising sequence."""
    opts = opts or SolveOptions()
    N = params.N
    if grid.N != N:
        raise ConfigurationError(f"grid dimension {grid.N} differs from N={N}")
    V1 = _check_potential(V1, grid, "V1")
    V2 = _check_potential(V2, grid, "V2")
    has_pot = V1 is not None or V2 is not None
    problem = _Problem(grid, (params.alpha1, params.alpha2), params.beta, [V1, V2])
    c_ref = energy_levels(params).c_infty
    comps, trace, it, converged, escaped = _run(
        problem, _seed(grid, 2, N, opts.seed_width), opts, _resolve_pin(opts, has_pot), c_ref, has_pot
    )
    pair = PairField(RadialField(grid, comps[0], N - 2), RadialField(grid, comps[1], N - 2))
    if has_pot:
        energy = j_potentials(pair, params, V1, V2).j_value
    else:
        energy = j_infty(pair, params).j_value
        if not converged:
            raise ConvergenceError(f"coupled solve did not converge in {opts.max_iters} iterations", trace=trace)
    mag = RadialField(grid, np.sqrt(comps[0] ** 2 + comps[1] ** 2), N - 2)
    return SolveResult(pair, energy, trace, it, converged, escaped, fit_bubble(mag), c_ref)


__all__ = [
    "SolveOptions",
    "SolveTrace",
    "SolveResult",
    "BubbleFit",
    "fit_bubble",
    "solve_scalar",
    "solve_coupled",
]
