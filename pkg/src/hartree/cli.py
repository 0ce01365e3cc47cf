"""Command-line interface: one subcommand per computation, JSON on stdout.

Exit status is 0 on success, 1 for invalid input (parameters, domain,
configuration, usage) and 2 when a verification misses its tolerance or
an iteration fails to converge. ``HARTREE_THREADS`` bounds the thread
count; outputs do not depend on it.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import csvio, kernels
from .constants import SystemParams, admissibility, constants_report, coupling, energy_levels
from .energy import barycenter_gamma, j_potentials, potential_sweep
from .errors import ConfigurationError, HartreeError, ToleranceError
from .kelvin import kelvin_deviation, sphere_invariance_scan
from .model import (
    BubbleSpec,
    PairField,
    bubble,
    cutoff_profile,
    cutoff_rates,
    groundstate_pair,
    integral_residual,
    pde_residual,
)
from .radial import DEFAULT_M, DEFAULT_Q, DEFAULT_R_MAX, RadialField, dirichlet_energy, lp_norm, make_grid
from .riesz import identity_check
from .solver import SCALE_PINS, SolveOptions, fit_bubble, solve_coupled, solve_scalar

SCHEMA = 1


class UsageError(HartreeError):
    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """JSON-safe copy: tuples to lists, numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _dump(report, stream):
    stream.write(json.dumps(_clean(report), sort_keys=True, indent=2) + "\n")


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


# argument groups


def _add_params(p, need_pair=True):
    p.add_argument("--n", type=int, required=True, help="dimension N >= 5")
    if need_pair:
        p.add_argument("--alpha1", type=float, required=True)
        p.add_argument("--alpha2", type=float, required=True)
        p.add_argument("--beta", type=float, required=True)


def _add_grid(p, M=DEFAULT_M, q=DEFAULT_Q):
    p.add_argument("--r-max", type=float, default=DEFAULT_R_MAX, help="outer grid radius")
    p.add_argument("--m", type=int, default=M, help="number of grid intervals")
    p.add_argument("--q", type=float, default=q, help="grading exponent")


def _add_potentials(p):
    p.add_argument("--v1", help="CSV (r,value) of the potential V1")
    p.add_argument("--v2", help="CSV (r,value) of the potential V2")
    p.add_argument("--v-power", type=float, help="use V1 = V2 = v_scale (1+r^2)^-v_power")
    p.add_argument("--v-scale", type=float, default=1.0)


def _params(a):
    return SystemParams(a.n, a.alpha1, a.alpha2, a.beta)


def _grid(a):
    return make_grid(a.n, a.r_max, a.m, a.q)


def _potentials(a, grid):
    if a.v_power is not None:
        if a.v1 or a.v2:
            raise UsageError("--v-power excludes --v1/--v2")
        if not a.v_power > 0.0:
            raise UsageError("--v-power must be positive")
        r = grid.nodes
        V = RadialField(grid, a.v_scale * (1.0 + r * r) ** (-a.v_power), 2.0 * a.v_power)
        return V, V
    V1 = csvio.read_field(a.v1, grid) if a.v1 else None
    V2 = csvio.read_field(a.v2, grid) if a.v2 else None
    return V1, V2


def _potential_norm(V, N):
    return 0.0 if V is None else lp_norm(V, N / 2)


def _potential_block(a, V1, V2, N):
    if V1 is None and V2 is None:
        return None
    return {
        "v1": a.v1,
        "v2": a.v2,
        "v_power": a.v_power,
        "v_scale": a.v_scale if a.v_power is not None else None,
        "v1norm": _potential_norm(V1, N),
        "v2norm": _potential_norm(V2, N),
    }


def _report(command, params=None, grid=None, tolerances=None, **result):
    out = {
        "schema": SCHEMA,
        "command": command,
        "backend": kernels.BACKEND,
        "params": params.to_dict() if hasattr(params, "to_dict") else params,
        "grid": grid.to_dict() if grid is not None else None,
        "tolerances": tolerances or {},
    }
    out.update(result)
    return out


def _check(report, checks):
    report["checks"] = checks
    failed = [k for k, v in checks.items() if not v]
    if failed:
        raise _Failed(report, "missed tolerance: " + ", ".join(failed))
    return report


class _Failed(ToleranceError):
    def __init__(self, report, detail):
        super().__init__(detail)
        self.report = report


# subcommands


def cmd_constants(a):
    params = _params(a)
    return _report("constants", params, None, {"quadrature_rel": 1e-13}, **constants_report(params).to_dict())


def cmd_admissible(a):
    params = _params(a)
    grid = None
    if a.v1 or a.v2 or a.v_power is not None:
        if a.v1norm is not None or a.v2norm is not None:
            raise UsageError("give potential norms or potential fields, not both")
        grid = _grid(a)
        V1, V2 = _potentials(a, grid)
        n1, n2 = _potential_norm(V1, a.n), _potential_norm(V2, a.n)
    else:
        n1 = 0.0 if a.v1norm is None else a.v1norm
        n2 = 0.0 if a.v2norm is None else a.v2norm
    res = admissibility(params, n1, n2)
    return _report(
        "admissible", params, grid, {}, admissible=res.admissible, lhs=res.lhs, rhs=res.rhs, v1norm=n1, v2norm=n2
    )


def cmd_verify_identity(a):
    grid = _grid(a)
    res = identity_check(grid, a.s, a.method, a.count, a.sample_max)
    rep = _report(
        "verify-identity",
        {"N": a.n, "s": a.s, "method": a.method},
        grid,
        {"max_relative_residual": a.tol},
        **res,
    )
    return _check(rep, {"identity": res["max_relative_residual"] <= a.tol})


def cmd_bubble(a):
    grid = _grid(a)
    if a.groundstate:
        params = _params(a)
        pair = groundstate_pair(params, a.delta, grid)
        if a.out:
            csvio.write_pair(a.out, pair)
        e = j_potentials(pair, params)
        result = {
            "delta": a.delta,
            "u0": pair.u.values[0],
            "v0": pair.v.values[0],
            "j_infty": e.j_value,
            "c_infty": energy_levels(params).c_infty,
        }
        return _report("bubble", params, grid, {}, out=a.out, **result)
    if a.alpha1 is not None or a.alpha2 is not None or a.beta is not None:
        raise UsageError("coupling constants are only used with --groundstate")
    U = bubble(a.n, BubbleSpec(a.delta, a.amplitude), grid)
    if a.out:
        csvio.write_field(a.out, U)
    return _report(
        "bubble",
        {"N": a.n, "delta": a.delta, "amplitude": a.amplitude},
        grid,
        {},
        out=a.out,
        value_at_zero=U.values[0],
        dirichlet_energy=dirichlet_energy(U),
        tail_exponent=U.tail_exponent,
    )


def _read_pair(a, grid=None):
    if a.pair:
        if a.u or a.v:
            raise UsageError("--pair excludes --u/--v")
        return csvio.read_pair(a.pair, grid)
    if not a.u:
        raise UsageError("give --pair or --u")
    u = csvio.read_field(a.u, grid)
    v = csvio.read_field(a.v, u.grid) if a.v else RadialField.zeros(u.grid)
    return PairField(u, v)


def cmd_energy(a):
    params = _params(a)
    pair = _read_pair(a)
    if pair.grid.N != a.n:
        raise ConfigurationError(f"input grid dimension {pair.grid.N} differs from N={a.n}")
    V1, V2 = _potentials(a, pair.grid)
    e = j_potentials(pair, params, V1, V2)
    return _report(
        "energy",
        params,
        pair.grid,
        {},
        potentials=_potential_block(a, V1, V2, a.n),
        c_infty=energy_levels(params).c_infty,
        **e.to_dict(),
    )


def cmd_residual(a):
    params = _params(a)
    if a.pair:
        pair = csvio.read_pair(a.pair)
        grid = pair.grid
        if grid.N != a.n:
            raise ConfigurationError(f"input grid dimension {grid.N} differs from N={a.n}")
    else:
        grid = _grid(a)
        pair = groundstate_pair(params, a.delta, grid)
    pde = pde_residual(pair, params)
    integ = integral_residual(pair, params)
    worst = max(pde.res_u, pde.res_v, integ.res_u, integ.res_v)
    rep = _report(
        "residual",
        params,
        grid,
        {"max_residual": a.tol},
        source=a.pair or {"delta": a.delta},
        pde=pde.to_dict(),
        integral=integ.to_dict(),
        max_residual=worst,
    )
    return _check(rep, {"residual": worst <= a.tol})


def cmd_concentration(a):
    params = _params(a)
    grid = _grid(a)
    cp = coupling(params)
    au = math.sqrt(cp.k0) if a.a_u is None else a.a_u
    av = math.sqrt(cp.l0) if a.a_v is None else a.a_v
    prof = cutoff_profile(a.n, a.eps, a.rho, grid)
    deltas = _floats(a.deltas)
    rows = []
    for d in deltas:
        rep = barycenter_gamma((au, av), prof, a.offset, params, delta=d, n_theta=a.n_theta)
        rows.append((d, rep.beta_axial, rep.gamma))
    if a.out:
        csvio.write_table(a.out, ["delta", "beta_axial", "gamma"], rows)
    return _report(
        "concentration",
        params,
        grid,
        {},
        profile={"eps": a.eps, "rho": a.rho},
        amplitudes=[au, av],
        center_offset=a.offset,
        n_theta=a.n_theta,
        out=a.out,
        rows=[{"delta": d, "beta_axial": b, "gamma": g} for d, b, g in rows],
    )


def cmd_potential_sweep(a):
    grid = _grid(a)
    if a.v1:
        V = csvio.read_field(a.v1, grid)
        source = {"v1": a.v1}
    else:
        r = grid.nodes
        V = RadialField(grid, a.v_scale * (1.0 + r * r) ** (-a.v_power), 2.0 * a.v_power)
        source = {"v_power": a.v_power, "v_scale": a.v_scale}
    prof = cutoff_profile(a.n, a.eps, a.rho, grid)
    deltas = _floats(a.deltas)
    vals = potential_sweep(V, prof, [1.0] + deltas)
    ref, vals = vals[0], vals[1:]
    rows = [(d, v, v / ref) for d, v in zip(deltas, vals)]
    if a.out:
        csvio.write_table(a.out, ["delta", "potential_term", "ratio"], rows)
    return _report(
        "potential-sweep",
        {"N": a.n, **source},
        grid,
        {},
        profile={"eps": a.eps, "rho": a.rho},
        reference=ref,
        out=a.out,
        rows=[{"delta": d, "potential_term": v, "ratio": q} for d, v, q in rows],
    )


def cmd_kelvin_check(a):
    if a.field:
        f = csvio.read_field(a.field)
        grid = f.grid
        params = {"field": a.field}
    else:
        grid = _grid(a)
        f = bubble(a.n, BubbleSpec(a.delta), grid)
        params = {"N": a.n, "delta": a.delta}
    lo = a.lambda_lo if a.lambda_lo is not None else 0.1 * (a.delta or 1.0)
    hi = a.lambda_hi if a.lambda_hi is not None else 10.0 * (a.delta or 1.0)
    scan = sphere_invariance_scan(f, (lo, hi), a.count)
    if a.out:
        csvio.write_table(a.out, ["lambda", "deviation"], zip(scan.lambdas, scan.deviations))
    rep = _report(
        "kelvin-check",
        params,
        grid,
        {"fixed_point": a.tol, "argmin_rel": a.argmin_tol},
        out=a.out,
        range=[lo, hi],
        count=a.count,
        argmin_lambda=scan.argmin_lambda,
        min_deviation=scan.min_deviation,
    )
    checks = {}
    if not a.field:
        fixed = kelvin_deviation(f, a.delta)
        rep["fixed_point_deviation"] = fixed
        rep["argmin_rel_error"] = abs(scan.argmin_lambda - a.delta) / a.delta
        checks = {"fixed_point": fixed <= a.tol, "argmin": rep["argmin_rel_error"] <= a.argmin_tol}
    return _check(rep, checks)


def cmd_cutoff_rates(a):
    eps = np.geomspace(a.eps_lo, a.eps_hi, a.count)
    res = cutoff_rates(a.n, a.rho, eps)
    N = a.n
    slack = a.slope_slack
    if a.out:
        cols = ["eps", "dirichlet_excess", "nonlocal_deficit", "nonlocal_excess", "nehari_norm_sq"]
        rows = zip(res.eps, res.dirichlet_excess, res.nonlocal_deficit, res.nonlocal_excess, res.nehari_norm_sq)
        csvio.write_table(a.out, cols, rows)
    rep = _report(
        "cutoff-rates",
        {"N": N, "rho": a.rho},
        None,
        {"slope_slack": slack, "quadrature_rel": 1e-12},
        out=a.out,
        expected={"dirichlet": N - 2, "deficit_at_least": N - 2, "excess_at_least": 2 * N - 4},
        **res.to_dict(),
    )
    checks = {
        "dirichlet": abs(res.dirichlet_slope - (N - 2)) <= slack,
        "deficit": res.deficit_slope >= N - 2 - slack,
        "excess": res.excess_slope >= 2 * N - 4 - slack,
        "nehari_above": all(x > res.s_hl_squared for x in res.nehari_norm_sq),
    }
    return _check(rep, checks)


def cmd_solve(a):
    grid = _grid(a)
    opts = SolveOptions(
        max_iters=a.max_iters,
        step0=a.step0,
        energy_tol=a.energy_tol,
        scale_pin=a.scale_pin,
        seed_width=a.seed_width,
    )
    V1, V2 = _potentials(a, grid)
    if a.scalar:
        if V1 is not None or V2 is not None:
            raise UsageError("the scalar solve takes no potentials")
        if a.alpha2 is not None or a.beta is not None:
            raise UsageError("the scalar solve uses --alpha1 only")
        params = {"N": a.n, "alpha": a.alpha1}
        res = solve_scalar(a.alpha1, a.n, grid, opts)
        extra = {}
    else:
        if a.alpha2 is None or a.beta is None:
            raise UsageError("the coupled solve needs --alpha2 and --beta")
        params = SystemParams(a.n, a.alpha1, a.alpha2, a.beta)
        res = solve_coupled(params, grid, opts, V1, V2)
        u, v = res.pair.u.values, res.pair.v.values
        m = (grid.nodes <= 10.0) & (u > 0.0)
        cp = coupling(params)
        extra = {
            "ratio_target": math.sqrt(cp.l0 / cp.k0),
            "ratio_max_rel_error": float(np.max(np.abs(v[m] / u[m] / math.sqrt(cp.l0 / cp.k0) - 1.0))),
            "potentials": _potential_block(a, V1, V2, a.n),
        }
        if V1 is not None or V2 is not None:
            adm = admissibility(params, _potential_norm(V1, a.n), _potential_norm(V2, a.n))
            extra["admissibility"] = {"admissible": adm.admissible, "lhs": adm.lhs, "rhs": adm.rhs}
    if a.out:
        if a.scalar:
            csvio.write_field(a.out, res.pair.u)
        else:
            csvio.write_pair(a.out, res.pair)
    if a.trace_out:
        csvio.write_table(a.trace_out, ["iter", "energy", "nehari_t", "delta_fit"], res.trace.rows())
    opts_block = {
        "max_iters": opts.max_iters,
        "step0": opts.step0,
        "scale_pin": opts.scale_pin,
        "seed_width": opts.seed_width,
        "patience": opts.patience,
        "escape_delta": list(opts.escape_delta),
        "escape_gap": opts.escape_gap,
    }
    return _report(
        "solve",
        params,
        grid,
        {"energy_tol": opts.energy_tol},
        options=opts_block,
        out=a.out,
        trace_out=a.trace_out,
        **res.summary(),
        **extra,
    )


def cmd_fit(a):
    if a.field:
        f = csvio.read_field(a.field)
        src = a.field
    elif a.pair:
        pair = csvio.read_pair(a.pair)
        f = RadialField(pair.grid, np.hypot(pair.u.values, pair.v.values), pair.u.tail_exponent)
        src = a.pair
    else:
        raise UsageError("give --field or --pair")
    fit = fit_bubble(f)
    return _report("fit", {"source": src}, f.grid, {}, **fit.to_dict())


def build_parser():
    p = _Parser(prog="hartree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("constants", help="closed-form and quadrature constants")
    _add_params(s)
    s.set_defaults(fn=cmd_constants)

    s = sub.add_parser("admissible", help="smallness test for the potentials")
    _add_params(s)
    s.add_argument("--v1norm", type=float)
    s.add_argument("--v2norm", type=float)
    _add_potentials(s)
    _add_grid(s)
    s.set_defaults(fn=cmd_admissible)

    s = sub.add_parser("verify-identity", help="Riesz potential of (1+r^2)^(s-N)")
    _add_params(s, need_pair=False)
    s.add_argument("--s", type=float, default=2.0)
    s.add_argument("--method", choices=("auto", "harmonic", "angular"), default="auto")
    s.add_argument("--count", type=int, default=20)
    s.add_argument("--sample-max", type=float, default=25.0)
    s.add_argument("--tol", type=float, default=1e-4)
    _add_grid(s)
    s.set_defaults(fn=cmd_verify_identity)

    s = sub.add_parser("bubble", help="write a bubble or the ground-state pair")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--amplitude", type=float)
    s.add_argument("--groundstate", action="store_true", help="write (sqrt(k0) U, sqrt(l0) U) as r,u,v")
    s.add_argument("--alpha1", type=float)
    s.add_argument("--alpha2", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--out")
    _add_grid(s)
    s.set_defaults(fn=cmd_bubble)

    s = sub.add_parser("residual", help="differential and integral residuals of a pair")
    _add_params(s)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--pair", help="CSV (r,u,v); default is the ground-state pair")
    s.add_argument("--tol", type=float, default=1e-3)
    _add_grid(s)
    s.set_defaults(fn=cmd_residual)

    s = sub.add_parser("energy", help="energy of a pair read from CSV")
    _add_params(s)
    s.add_argument("--pair")
    s.add_argument("--u")
    s.add_argument("--v")
    _add_potentials(s)
    s.set_defaults(fn=cmd_energy)

    s = sub.add_parser("concentration", help="barycenter and concentration of a dilated cutoff pair")
    _add_params(s)
    s.add_argument("--deltas", default="0.001,0.01,0.1,1,10,100,1000")
    s.add_argument("--offset", type=float, default=0.0)
    s.add_argument("--eps", type=float, default=1.0)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--a-u", type=float)
    s.add_argument("--a-v", type=float)
    s.add_argument("--n-theta", type=int, default=128)
    s.add_argument("--out")
    _add_grid(s)
    s.set_defaults(fn=cmd_concentration)

    s = sub.add_parser("potential-sweep", help="potential term along a dilation family")
    _add_params(s, need_pair=False)
    s.add_argument("--deltas", default="0.001,0.01,0.1,10,100,1000")
    s.add_argument("--v1", help="CSV (r,value) of the potential")
    s.add_argument("--v-power", type=float, default=2.0)
    s.add_argument("--v-scale", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=1.0)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--out")
    _add_grid(s)
    s.set_defaults(fn=cmd_potential_sweep)

    s = sub.add_parser("kelvin-check", help="Kelvin invariance scan over sphere radii")
    s.add_argument("--n", type=int, default=6)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--field", help="CSV (r,value); default is the bubble of scale --delta")
    s.add_argument("--lambda-lo", type=float)
    s.add_argument("--lambda-hi", type=float)
    s.add_argument("--count", type=int, default=64)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--argmin-tol", type=float, default=0.01)
    s.add_argument("--out")
    _add_grid(s)
    s.set_defaults(fn=cmd_kelvin_check)

    s = sub.add_parser("cutoff-rates", help="energy deviations of the cutoff bubble")
    _add_params(s, need_pair=False)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--eps-lo", type=float, default=0.02)
    s.add_argument("--eps-hi", type=float, default=0.2)
    s.add_argument("--count", type=int, default=7)
    s.add_argument("--slope-slack", type=float, default=0.6)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_cutoff_rates)

    s = sub.add_parser("solve", help="ground state by Nehari-projected descent")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha1", type=float, required=True)
    s.add_argument("--alpha2", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--scalar", action="store_true", help="scalar equation with alpha = --alpha1")
    _add_potentials(s)
    s.add_argument("--max-iters", type=int, default=2000)
    s.add_argument("--step0", type=float, default=0.1)
    s.add_argument("--energy-tol", type=float, default=1e-10)
    s.add_argument("--scale-pin", choices=SCALE_PINS, default="auto")
    s.add_argument("--seed-width", type=float, default=0.3)
    s.add_argument("--out")
    s.add_argument("--trace-out")
    _add_grid(s, M=1024)
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("fit", help="least-squares bubble fit of a field")
    s.add_argument("--field")
    s.add_argument("--pair")
    s.set_defaults(fn=cmd_fit)
    return p


def _exit_code(err):
    return 2 if isinstance(err, ToleranceError) else 1


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        report = args.fn(args)
    except _Failed as err:
        report = dict(err.report)
        report["error"] = {"kind": err.kind, "detail": err.detail}
        _dump(report, stdout)
        return 2
    except HartreeError as err:
        _dump({"schema": SCHEMA, "error": {"kind": err.kind, "detail": err.detail}}, stdout)
        return _exit_code(err)
    except OSError as err:
        _dump({"schema": SCHEMA, "error": {"kind": "io", "detail": str(err)}}, stdout)
        return 1
    _dump(report, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
