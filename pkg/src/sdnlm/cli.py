"""Command-line interface.

Exit status: 0 on success, 1 on input errors, 2 on numeric failures.
Numeric results are printed one per line as ``name=value``.
"""
import argparse
import logging
import sys

from .decomposition import h_alpha_scatter, pauli_rgb, write_scatter_csv
from .divergence import CommonLooks, PerPatchLooks
from .errors import InputError, NumericError
from .filters import FilterConfig, boxcar, sdnlm
from .io import load_phantom, load_regions, read_phf, write_phf, write_ppm
from .metrics import RegionOfInterest, channel_extract, enl, ssim_polsar
from .phantom import simulate_phantom

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _emit(name, value):
    print(f"{name}={value:.6f}")


def _ints(text, n, what):
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} must be {n} comma-separated integers") from None
    if len(vals) != n:
        raise UsageError(f"{what} must be {n} comma-separated integers")
    return vals


def _looks_mode(text):
    if text == "perpatch":
        return PerPatchLooks()
    if text.startswith("common:"):
        try:
            looks = float(text.split(":", 1)[1])
        except ValueError:
            looks = -1.0
        if looks > 0:
            return CommonLooks(looks)
    raise UsageError(f"--looks-mode must be 'perpatch' or 'common:<L>', got {text!r}")


def cmd_simulate(args):
    spec = load_phantom(args.phantom)
    write_phf(simulate_phantom(spec, args.seed), args.output)


def cmd_filter(args):
    if args.window < 3 or args.window % 2 == 0:
        raise UsageError("--window must be an odd integer >= 3")
    if args.patch < 1 or args.patch % 2 == 0:
        raise UsageError("--patch must be an odd integer >= 1")
    if not 0.0 < args.eta < 1.0:
        raise UsageError("--eta must lie strictly between 0 and 1")
    if args.iterations < 1:
        raise UsageError("--iterations must be >= 1")
    mode = _looks_mode(args.looks_mode)
    image = read_phf(args.input)
    if args.method == "boxcar":
        out = boxcar(image, args.window, args.iterations)
    else:
        config = FilterConfig(eta=args.eta, center_window=args.window, patch_side=args.patch,
                              looks_mode=mode, iterations=args.iterations)
        out = sdnlm(image, config, workers=args.workers)
    write_phf(out, args.output)


def cmd_enl(args):
    x, y, w, h = _ints(args.roi, 4, "--roi")
    image = read_phf(args.input)
    try:
        roi = RegionOfInterest(x, y, w, h)
        roi.check_inside(image.width, image.height)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit("enl", enl(channel_extract(image, args.channel), roi))


def cmd_ssim(args):
    _emit("ssim", ssim_polsar(read_phf(args.ref), read_phf(args.input)))


def cmd_pauli(args):
    lo, hi = _ints(args.stretch, 2, "--stretch")
    if not 0 <= lo < hi <= 100:
        raise UsageError("--stretch must satisfy 0 <= low < high <= 100")
    write_ppm(pauli_rgb(read_phf(args.input), (lo, hi)), args.output)


def cmd_halpha(args):
    image = read_phf(args.input)
    regions = load_regions(args.roi_file)
    for _, roi in regions:
        try:
            roi.check_inside(image.width, image.height)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    rows = h_alpha_scatter(image, regions)
    write_scatter_csv(rows, args.output)
    print(f"points={len(rows)}")


def build_parser():
    p = _Parser(prog="sdnlm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate a Wishart phantom")
    s.add_argument("--phantom", required=True, help="phantom spec JSON, or 'stock'")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("filter", help="filter a PHF image")
    f.add_argument("--method", choices=("sdnlm", "boxcar"), default="sdnlm")
    f.add_argument("--eta", type=float, default=0.90, help="confidence level in (0, 1)")
    f.add_argument("--iterations", type=int, default=1)
    f.add_argument("--window", type=int, default=5)
    f.add_argument("--patch", type=int, default=3)
    f.add_argument("--looks-mode", default="perpatch", help="'perpatch' or 'common:<L>'")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("-i", "--input", required=True)
    f.add_argument("-o", "--output", required=True)
    f.set_defaults(func=cmd_filter)

    e = sub.add_parser("enl", help="equivalent number of looks over a region")
    e.add_argument("-i", "--input", required=True)
    e.add_argument("--channel", choices=("hh", "hv", "vv"), required=True)
    e.add_argument("--roi", required=True, help="x,y,w,h")
    e.set_defaults(func=cmd_enl)

    m = sub.add_parser("ssim", help="mean-channel SSIM against a reference")
    m.add_argument("--ref", required=True)
    m.add_argument("-i", "--input", required=True)
    m.set_defaults(func=cmd_ssim)

    r = sub.add_parser("pauli", help="Pauli false-color PPM")
    r.add_argument("-i", "--input", required=True)
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--stretch", default="1,99", help="low,high percentiles")
    r.set_defaults(func=cmd_pauli)

    h = sub.add_parser("halpha", help="H/alpha scatter table of labelled regions")
    h.add_argument("-i", "--input", required=True)
    h.add_argument("--roi-file", required=True)
    h.add_argument("-o", "--output", required=True)
    h.set_defaults(func=cmd_halpha)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"error={getattr(exc, 'code', 'numeric-failure')}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
