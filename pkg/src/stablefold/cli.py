"""Command-line interface: ``stablefold {density,mixing,table1,multidim}``.

Every output starts with a ``#`` comment holding the resolved
configuration; JSON outputs are a single ``{"config", "data"}`` object.
Exit codes: 0 success, 2 bad parameters, 3 numerical failure, 4 search
failure, 5 regime failure.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import mixing, montecarlo, multidim
from .errors import ParameterError, StableFoldError
from .folding import FoldingGeometry
from .images import (
    SmoothInitial,
    periodic_density,
    reflected_density,
    scaled_reflected_density,
    smooth_initial_density,
    tabulate,
    wrapped_density,
)
from .stable import StableLaw

_NOT_CONFIG = {"output", "plot", "config", "csv", "handler", "t_grid_given"}
_FLAGS = {"shifted"}


def parse_grid(text):
    """``start:stop:step`` range (inclusive), comma list, or single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ParameterError(f"bad range {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ParameterError(f"cannot parse grid {text!r}") from None


def read_config(path):
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ParameterError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}


def _header(args):
    return "# config: " + json.dumps(_config(args), sort_keys=True) + "\n"


def _emit(args, csv_text, data, text=None, extra_comments=()):
    if args.format == "json":
        body = json.dumps({"config": _config(args), "data": data}, indent=2, sort_keys=True) + "\n"
    else:
        body = _header(args) + "".join(f"# {c}\n" for c in extra_comments)
        body += text if args.format == "table" and text is not None else csv_text
    if args.output in (None, "-"):
        sys.stdout.write(body)
    else:
        with open(args.output, "w") as fh:
            fh.write(body)


def _plot(args, make_figure):
    if args.plot:
        from . import plotting

        plotting.save(make_figure(plotting), args.plot)


# --- density ---------------------------------------------------------------------


def cmd_density(args):
    law = StableLaw(args.alpha, args.t)
    v = args.variant
    if v == "reflected":
        grid = tabulate(lambda u: reflected_density(law, u), (-1.0, 1.0), args.grid)
    elif v == "wrapped":
        grid = tabulate(lambda u: wrapped_density(law, u), (-2.0, 2.0), args.grid)
    elif v == "periodic":
        grid = tabulate(lambda u: periodic_density(law, args.n, u), (-1.0, 1.0), args.grid)
    elif v == "scaled":
        geom = FoldingGeometry(r=args.r)
        grid = tabulate(lambda u: scaled_reflected_density(law, geom, u), (-args.r, args.r), args.grid)
    else:
        init = SmoothInitial.raised_cosine(args.mu_center, args.mu_width)
        grid = tabulate(
            lambda u: smooth_initial_density(law, init, u, shifted=args.shifted), (-1.0, 1.0), args.grid
        )
    _emit(args, grid.to_csv(), grid.to_dict())
    _plot(args, lambda p: p.density_figure(grid, f"{v} density, alpha={args.alpha:g}, t={args.t:g}"))


# --- mixing ----------------------------------------------------------------------


def cmd_mixing(args):
    geom = FoldingGeometry(r=args.r, n=args.n)
    if args.t_grid:
        times = parse_grid(args.t_grid)
    else:
        count = int(math.floor(args.tmax / args.h + 1e-9))
        if count < 1:
            raise ParameterError("tmax must be at least h")
        times = [args.h * (i + 1) for i in range(count)]
    report = mixing.verify_bound(args.alpha, args.h, times, geom, args.epsilon)
    t_char = mixing.characteristic_time(args.alpha, geom, args.epsilon)
    data = report.to_dict()
    data["T_char"] = t_char
    comments = [f"T_char: {t_char:.10g}", f"T_est: {report.T_est:.10g}"]
    comments += [f"{k}: {v}" for k, v in report.notes.items()]
    _emit(args, report.to_csv(), data, extra_comments=comments)
    _plot(args, lambda p: p.mixing_figure(report))


# --- table1 ----------------------------------------------------------------------


def cmd_table1(args):
    alphas = parse_grid(args.alpha)
    times = parse_grid(args.t_grid)
    table = montecarlo.run_table(alphas, times, args.M, args.N, args.seed, args.sampler)
    comments = [f"M={table.M} N={table.N} seed={table.seed} sampler={table.sampler}"]
    _emit(args, table.to_csv(), table.to_dict(), text=table.to_text(), extra_comments=comments)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(_header(args) + "".join(f"# {c}\n" for c in comments) + table.to_csv())
    _plot(args, lambda p: p.table_figure(table))


# --- multidim --------------------------------------------------------------------


def _parse_coeffs(text, k):
    coeffs = {}
    for item in text.split(";"):
        if not item.strip():
            continue
        try:
            idx, amp = item.split("=")
            coeffs[tuple(int(j) for j in idx.split(","))] = float(amp)
        except ValueError:
            raise ParameterError(f"cannot parse mode {item!r}; use j1,j2=amp;...") from None
    return coeffs


def cmd_multidim(args):
    if args.mode == "spectral":
        _multidim_spectral(args)
    elif args.mode == "product-bound":
        _multidim_product(args)
    else:
        _multidim_decay(args)


def _spectral_init(args):
    if args.coeffs:
        return multidim.SpectralInit(args.k, args.n, _parse_coeffs(args.coeffs, args.k))
    return multidim.SpectralInit.default(args.k, args.n, args.modes)


def _multidim_spectral(args):
    init = _spectral_init(args)
    t = parse_grid(args.t_grid)[0]
    axis = np.linspace(-1.0, 1.0, args.grid)
    if init.k == 1:
        vals = multidim.spectral_solution(init, t, axis[:, None])
        csv = "y1,value\n" + "".join(f"{y:.17g},{v:.17g}\n" for y, v in zip(axis, vals))
        data = {"y1": axis.tolist(), "value": vals.tolist()}
    else:
        y1, y2 = np.meshgrid(axis, axis, indexing="ij")
        pts = np.zeros(y1.shape + (init.k,))
        pts[..., 0], pts[..., 1] = y1, y2
        vals = multidim.spectral_solution(init, t, pts)
        csv = "y1,y2,value\n" + "".join(
            f"{a:.17g},{b:.17g},{v:.17g}\n" for a, b, v in zip(y1.ravel(), y2.ravel(), vals.ravel())
        )
        data = {"y1": axis.tolist(), "y2": axis.tolist(), "value": vals.tolist()}
        _plot(args, lambda p: p.slice_figure(axis, axis, vals, f"spectral solution, k={init.k}, t={t:g}"))
    _emit(args, csv, data)


def _multidim_product(args):
    t = parse_grid(args.t_grid)[0]
    law = StableLaw(args.alpha, t)
    nodes = args.grid if args.grid % (2 * args.n) == 1 else mixing.distance_nodes(FoldingGeometry(n=args.n), 64)
    factor = tabulate(lambda u: periodic_density(law, args.n, u), (-1.0, 1.0), nodes)
    product = multidim.product_density([factor] * args.k)
    delta = float(np.max(np.abs(factor.values - 0.5)))
    D = float(np.max(np.abs(product.on_grid() - 0.5**args.k)))
    bound = multidim.product_bound(delta, args.k)
    data = {
        "delta": delta,
        "D": D,
        "bound": bound,
        "holds": bool(D <= bound + 1e-12),
        "L": int(math.floor(t * args.n**args.alpha + 1e-12)),
        "L_reciprocal_exponent": int(math.floor(t * args.n ** (1.0 / args.alpha) + 1e-12)),
    }
    csv = "delta,D,bound,holds\n" + f"{delta:.17g},{D:.17g},{bound:.17g},{data['holds']}\n"
    comments = [f"L = floor(t n^alpha) = {data['L']} (floor(t n^(1/alpha)) = {data['L_reciprocal_exponent']})"]
    _emit(args, csv, data, extra_comments=comments)


def _multidim_decay(args):
    init = _spectral_init(args)
    t_grid = parse_grid(args.t_grid) if args.t_grid_given else None
    slope = multidim.decay_rate_fit(init, t_grid)
    expected = -(np.pi**2) * init.k * init.n**2
    rel = abs(slope / expected - 1.0)
    data = {"slope": slope, "expected": expected, "relative_error": rel}
    csv = "slope,expected,relative_error\n" + f"{slope:.17g},{expected:.17g},{rel:.17g}\n"
    _emit(args, csv, data)
    if args.plot:
        t0 = multidim.asymptotic_start(init)
        times = t_grid or list(t0 + np.linspace(0.0, 1.0 / init.rate((1,) * init.k), 8))
        dist = np.array([multidim.sup_distance(init, t) for t in times])
        _plot(args, lambda p: p.decay_figure(times, dist, slope, f"decay, k={init.k}, n={init.n}"))


# --- parser ----------------------------------------------------------------------


def _common(p, fmt="csv"):
    p.add_argument("--config", help="key=value file supplying defaults")
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json", "table"), default=fmt)
    p.add_argument("--plot", help="also write a figure (.svg, .png, .pdf)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stablefold", description="Reflected symmetric stable diffusion on intervals and hypercubes."
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("density", help="tabulate a folded density")
    _common(p)
    p.add_argument("--variant", choices=("reflected", "wrapped", "periodic", "scaled", "smooth"), default="reflected")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=201, help="odd number of nodes")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--mu-center", type=float, default=0.0)
    p.add_argument("--mu-width", type=float, default=1.0)
    p.add_argument("--shifted", action="store_true", help="start at -1 + z instead of z")
    p.set_defaults(handler=cmd_density)

    p = subs.add_parser("mixing", help="distances to uniform, bounds and characteristic time")
    _common(p)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--tmax", type=float, default=10.0)
    p.add_argument("--t", dest="t_grid", help="time grid start:stop:step or list (overrides --tmax)")
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=mixing.DEFAULT_EPSILON)
    p.set_defaults(handler=cmd_mixing)

    p = subs.add_parser("table1", help="Monte-Carlo S(t) table")
    _common(p, fmt="table")
    p.add_argument("--alpha", default=",".join(f"{a:g}" for a in montecarlo.TABLE_ALPHAS))
    p.add_argument("--t", dest="t_grid", default="0.01:0.09:0.01")
    p.add_argument("--M", type=int, default=montecarlo.DEFAULT_M)
    p.add_argument("--N", type=int, default=montecarlo.DEFAULT_N)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampler", choices=("pareto", "exact"), default="pareto")
    p.add_argument("--csv", help="additional CSV output path")
    p.set_defaults(handler=cmd_table1)

    p = subs.add_parser("multidim", help="hypercube diffusion")
    _common(p)
    p.add_argument("--mode", choices=("spectral", "product-bound", "decay-fit"), default="spectral")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--t", dest="t_grid", default=None)
    p.add_argument("--grid", type=int, default=65)
    p.add_argument("--modes", type=int, default=multidim.DEFAULT_MODES, help="diagonal modes in the default initial density")
    p.add_argument("--coeffs", help="explicit modes, e.g. '1,1=0.1;2,2=0.05'")
    p.set_defaults(handler=cmd_multidim)
    return parser, subs


def _apply_config(parser, subs, argv, args):
    values = read_config(args.config)
    sub = subs.choices[args.command]
    known = {a.dest for a in sub._actions}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    for key in _FLAGS & set(values):
        values[key] = values[key].lower() in ("1", "true", "yes", "on")
    values.pop("config", None)
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None):
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    try:
        if args.config:
            args = _apply_config(parser, subs, argv, args)
        if args.command == "multidim":
            args.t_grid_given = args.t_grid is not None
            if args.t_grid is None:
                args.t_grid = "0.0"
        args.handler(args)
    except StableFoldError as exc:
        print(f"stablefold: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
