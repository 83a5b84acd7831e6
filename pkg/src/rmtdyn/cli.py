"""Command-line experiment runner.

Subcommands ``dyson``, ``lyapunov``, ``kernel``, ``duality`` and ``compare``
write CSV / JSON artifacts into ``--out``.  Exit codes: 0 success, 1 invalid
configuration, 2 numerical failure, 3 a ``--assert`` check failed.

The thread count (``--threads`` or the ``RMTDYN_THREADS`` environment
variable) changes wall time only; every chunk of samples draws from a
random stream fixed by the seed and the chunk index.
"""
import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import additive, finite, kernels, multiplicative, stats
from .ensembles import ENTRY_LAWS, RngStream, hermitian_eigenvalues
from .exceptions import ConditioningError, ConvergenceError, DomainError
from .io import read_csv, write_csv, write_json
from .parallel import THREADS_ENV, map_chunks

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERIC", "EXIT_ASSERT"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ASSERT = 0, 1, 2, 3
_VALUE_FLAGS = ("--range", "--grid", "--w", "--xi-shift", "--zeta")


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"range needs LO < HI, got {text!r}")
    return lo, hi


def _grid(text):
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}") from None
    if not lo <= hi or not step > 0:
        raise argparse.ArgumentTypeError(f"grid needs LO <= HI and STEP > 0, got {text!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count > 10**6:
        raise argparse.ArgumentTypeError("grid has more than 10^6 points")
    return lo, hi, step


def _wlist(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty w list")
    return vals


def _grid_points(grid):
    lo, hi, step = grid
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _add_common(p, samples=True):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    if samples:
        p.add_argument("--samples", type=int, default=1000, help="independent matrix samples")
        p.add_argument("--chunk-size", type=int, default=None,
                       help="samples per random stream; part of the reproducible config")
        p.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--prefix", default=None, help="file name prefix (default: subcommand)")
    p.add_argument("--assert", dest="assert_checks", action="store_true",
                   help="exit with code 3 if the acceptance checks fail")


def _add_kernel_family(p, families):
    p.add_argument("--family", choices=families, required=True)
    p.add_argument("--w", type=float, help="width-to-spacing ratio (kw, khat)")
    p.add_argument("--s", type=float, default=1.0, help="initial spacing (kt)")
    p.add_argument("--a", type=float, help="aspect ratio N/M (kp)")
    p.add_argument("--p", type=float, help="unfolded position in (0, 1) (kp)")
    p.add_argument("--n", type=int, help="matrix size (finite)")
    p.add_argument("--m", type=int, help="number of factors (finite)")
    p.add_argument("--variable", choices=("y", "lambda", "u"), default="y",
                   help="variable of the finite kernel")
    p.add_argument("--tol", type=float, default=None, help="kernel accuracy target")
    p.add_argument("--xi-shift", type=float, default=0.0,
                   help="evaluate the kernel at (xi - shift, zeta - shift)")


def build_parser():
    parser = _Parser(prog="rmtdyn", description="Random-matrix dynamics experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dyson", help="Dyson random walk from an equidistant start vs K_t")
    p.add_argument("--n", type=int, required=True, help="matrix size, odd (n = 2k - 1)")
    p.add_argument("--w", type=float, help="width-to-spacing ratio sigma_c sqrt(t)/s")
    p.add_argument("--t", type=float, help="time; alternative to --w")
    p.add_argument("--s", type=float, default=1.0, help="initial spacing")
    p.add_argument("--sigma-c", type=float, default=1.0, help="diffusion scale")
    p.add_argument("--range", type=_range, default=(-2.5, 2.5), help="histogram LO:HI")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--walk", action="store_true",
                   help="integrate the Coulomb-gas equations instead of one GUE draw")
    p.add_argument("--dt", type=float, default=None, help="walk time step (default t/200)")
    p.add_argument("--chi2-max", type=float, default=2.0)
    p.add_argument("--max-3sigma", type=float, default=0.02, help="allowed fraction of bins")
    _add_common(p)

    p = sub.add_parser("lyapunov", help="Lyapunov spectra of random-matrix products")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--law", choices=ENTRY_LAWS, default="gaussian-complex")
    p.add_argument("--method", choices=multiplicative.METHODS, default="qr")
    p.add_argument("--p", type=float, default=None, help="zoom position in (0, 1)")
    p.add_argument("--xi-max", type=float, default=3.0)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--xi-shift", type=float, default=0.0,
                   help="compare against Rhat(xi - shift)")
    p.add_argument("--no-raw", action="store_true", help="skip the per-sample exponent CSV")
    p.add_argument("--chi2-max", type=float, default=2.0)
    p.add_argument("--mean-z-max", type=float, default=3.0)
    p.add_argument("--std-rtol", type=float, default=0.05)
    _add_common(p)

    p = sub.add_parser("kernel", help="evaluate a kernel family on a grid")
    _add_kernel_family(p, ("kt", "kw", "sine", "khat", "kp", "finite"))
    p.add_argument("--grid", type=_grid, default=(-3.0, 3.0, 0.01), help="LO:HI:STEP")
    p.add_argument("--zeta", type=float, default=None,
                   help="second argument; the diagonal is written when omitted")
    _add_common(p, samples=False)

    p = sub.add_parser("duality", help="compare K_w and Khat_w")
    p.add_argument("--w", type=_wlist, required=True, help="comma-separated list")
    p.add_argument("--grid-extent", type=float, default=3.0)
    p.add_argument("--grid-step", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-8, help="bound for --assert")
    _add_common(p, samples=False)

    p = sub.add_parser("compare", help="compare a histogram CSV with a kernel density")
    p.add_argument("--hist", required=True, help="histogram CSV written by this tool")
    _add_kernel_family(p, ("kt", "kw", "sine", "khat", "kp", "finite"))
    p.add_argument("--chi2-max", type=float, default=2.0)
    p.add_argument("--max-3sigma", type=float, default=0.02)
    _add_common(p, samples=False)
    return parser


def _normalize_argv(argv):
    # let "--range -2.5:2.5" through: argparse would read "-2.5:2.5" as a flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            nxt = argv[i + 1]
            if len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{a}={nxt}")
                i += 2
                continue
        out.append(a)
        i += 1
    return out


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _paths(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prefix = args.prefix or args.command
    return lambda name: out / f"{prefix}_{name}"


def _config(args, **resolved):
    cfg = {k: v for k, v in vars(args).items() if k not in ("prefix",)}
    cfg.update(resolved)
    return cfg


def _chunk(args, default):
    c = args.chunk_size if args.chunk_size is not None else default
    _require(c >= 1, "--chunk-size must be >= 1")
    return c


# dyson

def _resolve_dyson(args):
    _require(args.n >= 1 and args.n % 2 == 1, "--n must be odd and positive (n = 2k - 1)")
    _require(args.s > 0 and args.sigma_c > 0, "--s and --sigma-c must be positive")
    _require((args.w is None) != (args.t is None), "give exactly one of --w and --t")
    if args.w is not None:
        _require(args.w > 0, "--w must be > 0: the kernel is a Dirac comb at w = 0")
        t = (args.w * args.s / args.sigma_c) ** 2
    else:
        _require(args.t > 0, "--t must be > 0")
        t = args.t
    w = additive.wsr_additive(args.sigma_c, t, args.s)
    _require(args.samples >= 1 and args.bins >= 1, "--samples and --bins must be >= 1")
    dt = args.dt if args.dt is not None else t / 200
    _require(dt > 0, "--dt must be > 0")
    return (args.n + 1) // 2, t, float(w), dt


def cmd_dyson(args):
    k, t, w, dt = _resolve_dyson(args)
    chunk = _chunk(args, 32)
    cfg = _config(args, k=k, t=t, w_resolved=w, dt=dt if args.walk else None, chunk_size=chunk)
    root = RngStream(args.seed)
    a0 = additive.equidistant_initial(k, args.s)
    diag0 = np.real(np.diag(a0))

    def work(c, lo, hi):
        gen = root.child(c).generator()
        if args.walk:
            init = np.broadcast_to(diag0, (hi - lo, diag0.size))
            traj = additive.coulomb_gas_walk(init, args.sigma_c, t, dt, gen, record_every=10**9)
            return traj.spectra[-1]
        mats = additive.additive_shortcut(a0, args.sigma_c, t, gen, size=hi - lo)
        return hermitian_eigenvalues(mats, check=False)

    lo, hi = args.range
    parts = map_chunks(lambda c, a, b: stats.histogram(work(c, a, b), lo, hi, args.bins),
                       args.samples, chunk, args.threads)
    hist = parts[0]
    for h in parts[1:]:
        hist = hist + h

    def analytic(x):
        return kernels.kernel_Kt(x, x, args.s, w)

    report = stats.compare(hist, analytic)
    xs = np.linspace(lo, hi, 4 * args.bins + 1)
    path = _paths(args)
    write_csv(path("histogram.csv"), ["bin_center", "density", "poisson_error"], hist.to_rows(), cfg)
    write_csv(path("analytic.csv"), ["x", "density"], zip(xs.tolist(), analytic(xs).tolist()), cfg)
    passed = report.passes(args.chi2_max, args.max_3sigma)
    write_json(path("report.json"), {"comparison": report.to_dict(), "passed": passed,
                                     "underflow": hist.underflow, "overflow": hist.overflow}, cfg)
    _say(f"dyson: chi2/bin={report.chi2_per_bin:.3f} beyond-3sigma={report.bins_exceeding_3sigma}"
         f"/{report.bins} sup={report.sup_deviation:.3g}")
    return passed


# lyapunov

def cmd_lyapunov(args):
    _require(args.n >= 1 and args.m >= 1 and args.samples >= 1, "need --n, --m, --samples >= 1")
    if args.p is not None:
        _require(0 < args.p < 1, "--p must lie in (0, 1)")
        _require(args.xi_max > 0 and args.bins >= 1, "need --xi-max > 0 and --bins >= 1")
    chunk = _chunk(args, 64)
    a = multiplicative.aspect_ratio(args.n, args.m)
    w_loc = float(np.sqrt(a * args.p)) if args.p is not None else None
    cfg = _config(args, chunk_size=chunk, aspect_ratio=a, w_local=w_loc)
    pc = multiplicative.ProductConfig(args.n, args.m, args.law, RngStream(args.seed),
                                      args.samples, chunk, args.threads)
    spectrum = multiplicative.product_spectrum(pc, args.method)
    lam = spectrum.exponents
    u = multiplicative.unfold_u(lam)
    path = _paths(args)
    if not args.no_raw:
        rows = ((s, j + 1, lam[s, j], u[s, j]) for s in range(lam.shape[0]) for j in range(args.n))
        write_csv(path("exponents.csv"), ["sample", "j", "lambda", "u"], rows, cfg)

    j = np.arange(1, args.n + 1)
    mean = lam.mean(axis=0)
    std = lam.std(axis=0, ddof=1) if args.samples > 1 else np.zeros(args.n)
    stderr = std / np.sqrt(args.samples)
    pred = multiplicative.deterministic_positions(j)
    width = multiplicative.peak_width(j, args.m)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, (mean - pred) / stderr, np.inf)
    std_rel = std / width - 1.0
    peak_rows = zip(j.tolist(), mean.tolist(), std.tolist(), stderr.tolist(), pred.tolist(),
                    width.tolist(), z.tolist(), std_rel.tolist())
    write_csv(path("peaks.csv"), ["j", "mean", "std", "stderr", "psi_half", "width",
                                  "z_mean", "std_rel_err"], peak_rows, cfg)
    peaks_ok = bool(np.all(np.abs(z) <= args.mean_z_max) and np.all(np.abs(std_rel) <= args.std_rtol))
    result = {"method": spectrum.method, "peaks_ok": peaks_ok,
              "max_abs_z_mean": float(np.max(np.abs(z))),
              "max_abs_std_rel_err": float(np.max(np.abs(std_rel)))}
    passed = peaks_ok
    if args.p is not None:
        xi = stats.zoom_local(u, args.p, args.n, args.xi_max)
        hist = stats.histogram(xi, -args.xi_max, args.xi_max, args.bins, total_samples=args.samples)

        def analytic(x):
            return kernels.density_Rhat(np.asarray(x) - args.xi_shift, w_loc)

        report = stats.compare(hist, analytic)
        xs = np.linspace(-args.xi_max, args.xi_max, 4 * args.bins + 1)
        write_csv(path("local.csv"), ["bin_center", "density", "poisson_error"], hist.to_rows(), cfg)
        write_csv(path("rhat.csv"), ["xi", "density"], zip(xs.tolist(), analytic(xs).tolist()), cfg)
        passed = report.chi2_per_bin <= args.chi2_max
        result["local"] = report.to_dict()
        result["local_ok"] = bool(passed)
        _say(f"lyapunov: local chi2/bin={report.chi2_per_bin:.3f} at w={w_loc:.4g}")
    _say(f"lyapunov: max|z_mean|={result['max_abs_z_mean']:.2f} "
         f"max|std/width-1|={result['max_abs_std_rel_err']:.3f}")
    result["passed"] = bool(passed)
    write_json(path("report.json"), result, cfg)
    return passed


# kernel and compare

def _family_density(args):
    """Return ``(callable K(x, y), params)`` after validating the family's parameters."""
    f = args.family
    tol = {} if args.tol is None else {"tol": args.tol}
    if f in ("kw", "khat", "kt"):
        _require(args.w is not None and args.w > 0, f"--family {f} needs --w > 0")
    if f == "kt":
        _require(args.s > 0, "--s must be > 0")
    if f == "kp":
        _require(args.a is not None and args.a > 0, "--family kp needs --a > 0")
        _require(args.p is not None and 0 < args.p < 1, "--family kp needs --p in (0, 1)")
    if f == "finite":
        _require(args.n is not None and args.n >= 1, "--family finite needs --n >= 1")
        _require(args.m is not None and args.m >= 0, "--family finite needs --m >= 0")
        fk = finite.FiniteKernel(finite.FiniteKernelConfig(args.n, args.m, **tol))
        method = {"y": fk.KY, "lambda": fk.KL, "u": fk.Ku}[args.variable]
        return method, args.variable != "lambda"
    params = {"kt": {"s": args.s, "w": args.w}, "kw": {"w": args.w}, "sine": {},
              "khat": {"w": args.w}, "kp": {"a": args.a, "p": args.p}}[f]
    ev = kernels.make_kernel(f, tol=args.tol, **params)
    return ev, False


def _shifted(kernel, shift):
    if shift == 0:
        return kernel
    return lambda x, y: kernel(np.asarray(x) - shift, np.asarray(y) - shift)


def cmd_kernel(args):
    kernel, positive = _family_density(args)
    kernel = _shifted(kernel, args.xi_shift)
    xs = _grid_points(args.grid)
    cfg = _config(args)
    keep = xs > args.xi_shift if positive else np.ones(xs.size, bool)
    if args.zeta is not None and positive:
        _require(args.zeta > args.xi_shift, "--zeta must lie in the support (> 0)")
    skipped = int((~keep).sum())
    x = xs[keep]
    if args.zeta is None:
        vals = np.asarray(kernel(x, x), float)
        header = ["x", "density"]
    else:
        vals = np.asarray(kernel(x, np.full_like(x, args.zeta)), float)
        header = ["x", "kernel"]
    write_csv(_paths(args)(f"{args.family}.csv"), header, zip(x.tolist(), vals.tolist()), cfg)
    if skipped:
        _say(f"kernel: skipped {skipped} grid point(s) outside the support x > 0")
    return True


def _hist_from_csv(path):
    digest, header, rows = read_csv(path)
    if header is None or header[:3] != ["bin_center", "density", "poisson_error"]:
        raise ConfigError(f"{path}: not a histogram CSV (need bin_center,density,poisson_error)")
    arr = np.asarray([r[:3] for r in rows], float)
    if arr.shape[0] < 1:
        raise ConfigError(f"{path}: empty histogram")
    centers, dens, err = arr.T
    width = centers[1] - centers[0] if centers.size > 1 else 1.0
    nz = err > 0
    if not nz.any():
        raise ConfigError(f"{path}: histogram has no counts")
    counts = np.zeros(centers.size, np.int64)
    counts[nz] = np.rint((dens[nz] / err[nz]) ** 2).astype(np.int64)
    scale = float(np.median(counts[nz] / (dens[nz] * width)))
    lo, hi = centers[0] - width / 2, centers[-1] + width / 2
    return stats.Histogram(lo, hi, centers.size, counts, int(round(scale)), 1), digest


def cmd_compare(args):
    kernel, _ = _family_density(args)
    kernel = _shifted(kernel, args.xi_shift)
    hist, source_hash = _hist_from_csv(args.hist)
    cfg = _config(args, source_config_hash=source_hash)
    report = stats.compare(hist, lambda x: np.asarray(kernel(x, x), float))
    passed = report.passes(args.chi2_max, args.max_3sigma)
    write_json(_paths(args)("report.json"), {"comparison": report.to_dict(), "passed": passed}, cfg)
    _say(f"compare: chi2/bin={report.chi2_per_bin:.3f} beyond-3sigma={report.bins_exceeding_3sigma}"
         f"/{report.bins}")
    return passed


def cmd_duality(args):
    _require(all(w > 0 for w in args.w), "--w values must be > 0")
    _require(args.grid_extent > 0 and args.grid_step > 0, "grid extent and step must be > 0")
    cfg = _config(args)
    reports = [kernels.duality_report(w, args.grid_extent, args.grid_step) for w in args.w]
    passed = all(r.diag_max <= args.tol and r.r2_max <= args.tol for r in reports)
    write_json(_paths(args)("report.json"),
               {"reports": [r.to_dict() for r in reports], "passed": passed}, cfg)
    for r in reports:
        _say(f"duality: w={r.w:g} diag={r.diag_max:.2e} r2={r.r2_max:.2e} "
             f"gauge_quadratic={r.gauge_quadratic:.6g}")
    return passed


_COMMANDS = {"dyson": cmd_dyson, "lyapunov": cmd_lyapunov, "kernel": cmd_kernel,
             "duality": cmd_duality, "compare": cmd_compare}


def _say(msg):
    print(msg, file=sys.stderr)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalize_argv(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("rmtdyn: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        ok = _COMMANDS[args.command](args)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"rmtdyn: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ConditioningError, OverflowError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"rmtdyn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.assert_checks and not ok:
        print("rmtdyn: acceptance check failed", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
