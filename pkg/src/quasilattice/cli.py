"""Command-line entry point: ``quasilattice <noun> <verb> [options]``.

Every run that writes files also writes ``<first output>.config.json``, the
fully resolved configuration; ``quasilattice replay`` re-executes one.
Exit codes: 0 success, 1 computational error, 2 bad arguments.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import QuasilatticeError

DEFAULT_SEED = 1
# options that only affect speed or where files go, never the numbers
_NON_SEMANTIC = {"threads", "func", "command", "verb"}


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _modulus(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"k must lie in (0, 1), got {text}")
    return v


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text}")


def _gamma(text):
    vals = _float_list(text)
    if len(vals) < 4:
        raise argparse.ArgumentTypeError("need at least four offsets")
    return vals


def _threads(args):
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("QUASILATTICE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _emit_config(args, outputs):
    """Write the resolved configuration next to the first output file."""
    outputs = [o for o in outputs if o]
    if not outputs:
        return None
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NON_SEMANTIC}
    cfg = {"subcommand": args.command + ((" " + args.verb) if getattr(args, "verb", None) else ""),
           "parameters": params, "seed": getattr(args, "seed", DEFAULT_SEED),
           "version": __version__, "outputs": [str(o) for o in outputs]}
    path = Path(str(outputs[0]) + ".config.json")
    path.write_text(json.dumps(cfg, indent=2, sort_keys=True))
    return path


def _print_values(values, as_json):
    if as_json:
        print(json.dumps(list(values)))
    else:
        for v in values:
            print(v)


# tiling ------------------------------------------------------------------

def cmd_tiling_generate(args):
    from .export import plot_tiling, tiling_svg, write_tiling_json
    from .pentagrid import Pentagrid, generate_patch

    gamma = args.gamma or None
    n = args.n
    if gamma is None:
        from .pentagrid import DEFAULT_OFFSETS
        gamma = list(DEFAULT_OFFSETS) if n == 5 else list(np.linspace(0.1, 0.4, n) - 0.25 + 0.013)
    grid = Pentagrid(tuple(gamma), n)
    args.gamma = [float(g) for g in grid.offsets]
    patch = generate_patch(grid, args.radius)
    write_tiling_json(patch, args.out)
    outs = [args.out]
    if args.svg:
        Path(args.svg).write_text(tiling_svg(patch, ammann=args.ammann))
        outs.append(args.svg)
    if args.figure:
        plot_tiling(args.figure, patch, ammann=args.ammann)
        outs.append(args.figure)
    counts = patch.shape_counts()
    print(f"vertices {patch.n_vertices}")
    print(f"rhombi {patch.n_rhombi}")
    for shape, c in counts.items():
        print(f"{shape} {c}")
    return outs


# seq ----------------------------------------------------------------------

def cmd_seq_fibonacci(args):
    from .sequences import fibonacci_numbers
    _print_values(fibonacci_numbers(args.count), args.json)


def cmd_seq_fibonacci_word(args):
    from .sequences import fibonacci_word
    w = fibonacci_word(args.n)
    print(json.dumps(w.symbols) if args.json else w.symbols)


def cmd_seq_beatty(args):
    from .sequences import BeattySpec, beatty_sequence
    spec = BeattySpec(args.theta, args.shift, args.variant)
    _print_values(beatty_sequence(spec, args.start, args.stop), args.json)


def cmd_seq_cut_project(args):
    from .sequences import cut_and_project_1d, gap_word
    pts = cut_and_project_1d(args.slope, args.width, args.range, args.offset)
    pts = pts[(pts >= args.lo) & (pts <= args.hi)]
    if args.word:
        word, gaps = gap_word(pts)
        print(word if word is not None else f"{len(gaps)} distinct gaps")
        return
    _print_values([float(p) for p in pts], args.json)


def cmd_seq_kronecker(args):
    from .export import write_rows_csv
    from .sequences import kronecker_stats
    st = kronecker_stats(args.x, args.count, args.bins)
    rows = [(float(a), float(b), int(c)) for a, b, c in zip(st.bin_edges[:-1], st.bin_edges[1:], st.counts)]
    if args.out:
        write_rows_csv(args.out, ("bin_lo", "bin_hi", "count"), rows)
    else:
        print("bin_lo,bin_hi,count")
        for r in rows:
            print(",".join(map(repr, r)))
    print(f"max_deviation {st.max_deviation:.6g}", file=sys.stderr)
    return [args.out]


# elliptic -----------------------------------------------------------------

def cmd_elliptic_eval(args):
    from .elliptic import complete_K, cs, jacobi, sc
    sn, cn, dn = jacobi(args.u, args.m)
    print(f"sn {sn!r}")
    print(f"cn {cn!r}")
    print(f"dn {dn!r}")
    for name, fn in (("sc", sc), ("cs", cs)):
        try:
            print(f"{name} {fn(args.u, args.m)!r}")
        except QuasilatticeError:
            print(f"{name} pole")
    print(f"K {complete_K(args.m)!r}")


# ising --------------------------------------------------------------------

def cmd_ising_couplings(args):
    from .elliptic import EllipticParams
    from .ising.couplings import diagonal_class_coupling
    params = EllipticParams(args.k, args.regime)
    classes = [args.l] if args.l else [1, 2, 3, 4]
    for l in classes:
        print(f"l={l} betaJ={diagonal_class_coupling(params, l)!r}")


def cmd_ising_check_st(args):
    from .elliptic import EllipticParams
    from .ising.couplings import star_triangle_check
    rng = np.random.default_rng(args.seed)
    worst, spread = 0.0, 0.0
    for regime in (args.regime,) if args.regime else ("low", "high"):
        params = EllipticParams(args.k, regime)
        kp = params.quarter_period
        for _ in range(args.samples):
            w, v, u = np.sort(rng.uniform(0.02, 0.95, 3)) * kp
            res = star_triangle_check(params, u, v, w)
            worst = max(worst, res.residual)
            spread = max(spread, res.R_spread)
    print(f"max_residual {worst:.3e}")
    print(f"max_R_spread {spread:.3e}")


def cmd_ising_g(args):
    from .elliptic import EllipticParams
    from .ising.correlations import CorrelationTable, RapidityMultiset, g_correlation
    params = EllipticParams(args.k, args.regime)
    rap = [x * params.quarter_period for x in args.rapidities]
    ms = RapidityMultiset.normalized(rap, params.quarter_period)
    table = CorrelationTable(n_max=max(1, ms.count // 2), tolerance=args.tolerance)
    g = g_correlation(table, params, ms)
    gd = g_correlation(table, params, ms, dual=True)
    print(f"g {g!r}")
    print(f"g* {gd!r}")
    print(f"base_error {table.max_base_error:.2e}")


# prob ---------------------------------------------------------------------

def cmd_prob_configs(args):
    from .environment import N_CLASSES, census, config_regions, config_table
    from .export import plot_map, write_pgm, write_rows_csv
    from .pentagrid import Pentagrid
    regions = config_regions(resolution=args.resolution)
    ids, meshes, _, _ = census(Pentagrid(), args.samples, seed=args.seed)
    freq = np.bincount(ids - 1, minlength=N_CLASSES) / len(ids)
    rows = [(c.id, c.mesh_count, c.corner_parity, int(c.reference_inside),
             repr(float(regions.areas[c.id - 1])), repr(float(freq[c.id - 1]))) for c in config_table()]
    write_rows_csv(args.out, ("class", "mesh_count", "corner_parity", "reference_inside", "area", "frequency"), rows)
    outs = [args.out]
    if args.pgm:
        write_pgm(args.pgm, regions.ids, {"quantity": "configuration class id", "resolution": args.resolution})
        outs.append(args.pgm)
    if args.figure:
        axis = (np.arange(args.resolution) + 0.5) / args.resolution
        plot_map(args.figure, regions.ids, axis, "configuration classes", "class id", cmap="tab20")
        outs.append(args.figure)
    print(f"classes_seen {len(np.unique(ids))}")
    print(f"mesh_range {int(meshes.min())} {int(meshes.max())}")
    print(f"max_freq_minus_area {float(np.abs(freq - regions.areas).max()):.3e}")
    return outs


def cmd_prob_joint(args):
    from .environment import joint_probability
    from .export import write_rows_csv
    jp = joint_probability(dk0=args.dk0, dk1=args.dk1, resolution=args.resolution)
    rows = [(a + 1, b + 1, repr(float(jp.probs[a, b])))
            for a in range(jp.probs.shape[0]) for b in range(jp.probs.shape[1])]
    write_rows_csv(args.out, ("row_class", "column_class", "probability"), rows)
    print(f"mass {float(jp.probs.sum())!r}")
    print(f"resolution_error {jp.resolution_error:.3e}")
    return [args.out]


# chi ----------------------------------------------------------------------

def cmd_chi_map(args):
    from .elliptic import EllipticParams
    from .export import plot_map, write_grid_csv, write_pgm
    from .pentagrid import Pentagrid, generate_patch
    from .structure import QGrid, chi_map

    params = EllipticParams(args.k, args.regime)
    patch = generate_patch(Pentagrid(), args.patch_radius)
    qmin = -4.0 * math.pi if args.qmin is None else args.qmin
    qmax = 4.0 * math.pi if args.qmax is None else args.qmax
    args.qmin, args.qmax = qmin, qmax
    chi = chi_map(patch, params, QGrid(qmin, qmax, args.grid), args.truncation, threads=_threads(args))
    meta = {"quantity": "beta chi(q)", "k": args.k, "regime": args.regime, "qmin": qmin, "qmax": qmax,
            "grid": args.grid, "truncation": args.truncation, "truncation_error": chi.truncation_error,
            "patch": chi.patch_descriptor}
    out = Path(args.out)
    if out.suffix.lower() == ".pgm":
        write_pgm(out, chi.values, meta)
    else:
        write_grid_csv(out, chi.q_grid.axis, chi.values)
    outs = [args.out]
    if args.figure:
        plot_map(args.figure, chi.values, chi.q_grid.axis,
                 f"chi(q), k={args.k}, {args.regime}", "beta chi", cmap="magma")
        outs.append(args.figure)
    print(f"min {float(chi.values.min())!r}")
    print(f"max {float(chi.values.max())!r}")
    print(f"truncation_error {chi.truncation_error:.3e}")
    return outs


# diffraction --------------------------------------------------------------

def cmd_diffraction(args):
    from .diffraction import PinholeSpec, intensity_map, map_metadata
    from .export import plot_map, write_grid_csv, write_pgm
    spec = PinholeSpec(args.pinholes, args.d, args.grid)
    vals, axis = intensity_map(spec)
    out = Path(args.out)
    if out.suffix.lower() == ".csv":
        write_grid_csv(out, axis, vals, names=("x", "y", "value"))
    else:
        write_pgm(out, vals, map_metadata(spec, vals))
    outs = [args.out]
    if args.figure:
        plot_map(args.figure, vals, axis, f"-log|A|^2, {args.pinholes} pinholes", "-log intensity",
                 cmap="gray")
        outs.append(args.figure)
    print(f"min {float(vals.min())!r}")
    print(f"max {float(vals.max())!r}")
    return outs


# report -------------------------------------------------------------------

def cmd_report(args):
    """Small end-to-end run: CSV tables plus figures in one directory."""
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    sub = [
        ["tiling", "generate", "--radius", "8", "--out", str(d / "tiling.json"), "--svg", str(d / "tiling.svg"),
         "--ammann", "--figure", str(d / "tiling.png")],
        ["prob", "configs", "--samples", "20000", "--resolution", "256", "--out", str(d / "configs.csv"),
         "--figure", str(d / "configs.png"), "--seed", str(args.seed)],
        ["prob", "joint", "--dk0", "3", "--dk1", "5", "--resolution", "256", "--out", str(d / "joint.csv")],
        ["diffraction", "--d", "50", "--grid", "400", "--out", str(d / "diffraction.pgm"),
         "--figure", str(d / "diffraction.png")],
    ]
    for regime in ("low", "high"):
        sub.append(["chi", "map", "--k", str(args.k), "--regime", regime, "--patch-radius", "12",
                    "--truncation", "5", "--grid", "96", "--out", str(d / f"chi_{regime}.csv"),
                    "--figure", str(d / f"chi_{regime}.png")])
    for argv in sub:
        print("## " + " ".join(argv[:2] if argv[0] != "diffraction" else argv[:1]))
        code = run(argv)
        if code:
            return code
    return 0


# replay -------------------------------------------------------------------

def cmd_replay(args):
    cfg = json.loads(Path(args.config).read_text())
    argv = config_to_argv(cfg)
    return run(argv)


def config_to_argv(cfg):
    """Rebuild an argument list from an emitted configuration."""
    parser = build_parser()
    words = cfg["subcommand"].split()
    params = dict(cfg["parameters"])
    sub = parser
    for w in words:
        sub = _subparser(sub, w)
    argv = list(words)
    for action in sub._actions:
        if not action.option_strings or action.dest not in params:
            continue
        val = params[action.dest]
        flag = action.option_strings[-1]
        if isinstance(action, argparse._StoreTrueAction):
            if val:
                argv.append(flag)
        elif val is None:
            continue
        elif isinstance(val, list):
            argv += [flag, ",".join(repr(float(x)) for x in val)]
        else:
            argv += [flag, repr(val) if isinstance(val, float) else str(val)]
    return argv


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


# parser -------------------------------------------------------------------

def _common(p, seed=False):
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker cap (default: $QUASILATTICE_THREADS or all cores)")
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)


def build_parser():
    parser = argparse.ArgumentParser(prog="quasilattice",
                                     description="Penrose tilings, quasiperiodic sequences and the Z-invariant Ising model.")
    parser.add_argument("--version", action="version",
                        version=f"quasilattice {__version__} (python {sys.version.split()[0]}, numpy {np.__version__})")
    nouns = parser.add_subparsers(dest="command", required=True)

    tiling = nouns.add_parser("tiling", help="Penrose and multigrid tilings").add_subparsers(dest="verb", required=True)
    p = tiling.add_parser("generate", help="dualize a pentagrid patch")
    p.add_argument("--radius", type=_positive_float, required=True)
    p.add_argument("--n", type=int, default=5, choices=range(4, 13), metavar="N")
    p.add_argument("--gamma", type=_gamma, default=None, help="comma-separated grid offsets")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")
    p.add_argument("--ammann", action="store_true", help="add the Ammann layer to SVG and figure")
    p.add_argument("--figure")
    _common(p)
    p.set_defaults(func=cmd_tiling_generate)

    seq = nouns.add_parser("seq", help="one-dimensional quasiperiodic sequences").add_subparsers(dest="verb", required=True)
    p = seq.add_parser("fibonacci")
    p.add_argument("--count", type=_positive_int, default=10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_seq_fibonacci)
    p = seq.add_parser("fibonacci-word")
    p.add_argument("--n", type=_positive_int, default=5)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_seq_fibonacci_word)
    p = seq.add_parser("beatty")
    p.add_argument("--theta", type=float, default=(1 + 5 ** 0.5) / 2)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--variant", choices=("floor", "ceil"), default="floor")
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--stop", type=int, default=20)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_seq_beatty)
    p = seq.add_parser("cut-project")
    p.add_argument("--slope", type=float, default=2 / (1 + 5 ** 0.5))
    p.add_argument("--width", type=_positive_float, default=None)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--range", type=_positive_int, default=60)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=30.0)
    p.add_argument("--word", action="store_true", help="print the gap word instead of the points")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_seq_cut_project)
    p = seq.add_parser("kronecker")
    p.add_argument("--x", type=float, default=2 / (1 + 5 ** 0.5))
    p.add_argument("--count", type=_positive_int, default=10000)
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=cmd_seq_kronecker)

    ell = nouns.add_parser("elliptic", help="Jacobi elliptic functions").add_subparsers(dest="verb", required=True)
    p = ell.add_parser("eval")
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--m", type=float, required=True, help="modulus (not the parameter m^2)")
    p.set_defaults(func=cmd_elliptic_eval)

    ising = nouns.add_parser("ising", help="Z-invariant Ising model").add_subparsers(dest="verb", required=True)
    p = ising.add_parser("couplings")
    p.add_argument("--k", type=_modulus, required=True)
    p.add_argument("--regime", choices=("low", "high"), default="low")
    p.add_argument("--l", type=int, choices=(1, 2, 3, 4), default=None)
    p.set_defaults(func=cmd_ising_couplings)
    p = ising.add_parser("check-st")
    p.add_argument("--k", type=_modulus, required=True)
    p.add_argument("--regime", choices=("low", "high"), default=None)
    p.add_argument("--samples", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_ising_check_st)
    p = ising.add_parser("g")
    p.add_argument("--k", type=_modulus, required=True)
    p.add_argument("--regime", choices=("low", "high"), default="low")
    p.add_argument("--rapidities", type=_float_list, required=True,
                   help="comma-separated rapidities in units of K(k')")
    p.add_argument("--tolerance", type=_positive_float, default=1e-9)
    p.set_defaults(func=cmd_ising_g)

    prob = nouns.add_parser("prob", help="local environment statistics").add_subparsers(dest="verb", required=True)
    p = prob.add_parser("configs")
    p.add_argument("--samples", type=_positive_int, default=100000)
    p.add_argument("--resolution", type=_positive_int, default=512)
    p.add_argument("--out", required=True)
    p.add_argument("--pgm")
    p.add_argument("--figure")
    _common(p, seed=True)
    p.set_defaults(func=cmd_prob_configs)
    p = prob.add_parser("joint")
    p.add_argument("--dk0", type=int, default=0)
    p.add_argument("--dk1", type=int, default=0)
    p.add_argument("--resolution", type=_positive_int, default=512)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_prob_joint)

    chi = nouns.add_parser("chi", help="susceptibility maps").add_subparsers(dest="verb", required=True)
    p = chi.add_parser("map")
    p.add_argument("--k", type=_modulus, required=True)
    p.add_argument("--regime", choices=("low", "high"), default="low")
    p.add_argument("--patch-radius", type=_positive_float, default=25.0)
    p.add_argument("--truncation", type=_positive_float, default=8.0)
    p.add_argument("--qmin", type=float, default=None)
    p.add_argument("--qmax", type=float, default=None)
    p.add_argument("--grid", type=_positive_int, default=128)
    p.add_argument("--out", required=True, help="chi.csv or chi.pgm")
    p.add_argument("--figure")
    _common(p)
    p.set_defaults(func=cmd_chi_map)

    p = nouns.add_parser("diffraction", help="five-pinhole Fraunhofer pattern")
    p.add_argument("--d", type=_positive_float, default=50.0)
    p.add_argument("--grid", type=_positive_int, default=400)
    p.add_argument("--pinholes", type=_positive_int, default=5)
    p.add_argument("--out", required=True, help="pattern.pgm or pattern.csv")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_diffraction, verb=None)

    p = nouns.add_parser("report", help="small end-to-end run writing tables and figures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--k", type=_modulus, default=0.7)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_report, verb=None)

    p = nouns.add_parser("replay", help="re-run an emitted .config.json")
    p.add_argument("config")
    p.set_defaults(func=cmd_replay, verb=None)
    return parser


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        outs = args.func(args)
    except QuasilatticeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(outs, int):
        return outs
    if outs and args.command not in ("report", "replay"):
        _emit_config(args, outs)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
