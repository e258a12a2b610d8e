"""Command-line front end: ``cmpkit <subcommand> ...``.

User-facing units are GHz and mT. Exit codes: 0 ok, 1 computation error,
2 usage error.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .config import load_config
from .coupling import FieldMap, dsc_threshold_frequency, evaluate_coupling, filling_factor, rank_field_maps
from .demag import REFERENCE_SLAB_DIMS_MM, SampleGeometry, demag_tensor, demag_volume_average
from .errors import CmpkitError, PhaseValidityError
from .fitting import FitProblem, fit, initial_guess, symmetrize
from .fmr import FmrParams, fmr_frequency_masked
from .polariton import DispersionModelParams, Model, branch_arrays, zero_field_gap
from .spectra import BranchData, Spectrum2D, extract_branches, synthesize

log = logging.getLogger("cmpkit")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _triple(text, kind=float):
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start,stop,steps; got {text!r}")
    start, stop, steps = float(parts[0]), float(parts[1]), int(float(parts[2]))
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be >= 1")
    return start, stop, steps


def _keyval(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    key, value = text.split("=", 1)
    key = key.strip().lower()
    return key, (float(value) if value.strip() else None)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _geometry(args, cfg):
    dims = args.dims_mm or REFERENCE_SLAB_DIMS_MM
    return SampleGeometry.from_dims_mm(dims, saturation_field=cfg.mu0_ms,
                                       bias_axis=getattr(args, "bias_axis", "z"))


def _fmr_params(args, cfg):
    geom = _geometry(args, cfg)
    demag = (demag_volume_average(geom, args.average) if getattr(args, "average", None)
             else demag_tensor(geom))
    return FmrParams(geom, demag, gyromagnetic_ratio=2 * np.pi * cfg.gamma)


# ---------------------------------------------------------------------------
# subcommands


def cmd_demag(args, cfg):
    geom = _geometry(args, cfg)
    if args.average:
        tensor = demag_volume_average(geom, args.average)
    elif args.point_mm:
        tensor = demag_tensor(geom, np.asarray(args.point_mm) * 1e-3)
    else:
        tensor = demag_tensor(geom)
    out = tensor.to_dict()
    out["dims_mm"] = [2e3 * a for a in geom.half_dims]
    out["trace"] = tensor.trace
    _emit(_json_text(out), args.out)
    return 0


def cmd_fmr(args, cfg):
    params = _fmr_params(args, cfg)
    start, stop, steps = args.field_sweep
    fields = np.linspace(start, stop, steps) * 1e-3
    f = fmr_frequency_masked(fields, params, args.field_mode)
    rows = [(float(h), float(v)) for h, v in zip(fields, f) if np.isfinite(v)]
    skipped = int(np.sum(~np.isfinite(f)))
    if skipped:
        print(f"fmr: {skipped} unsaturated field values omitted", file=sys.stderr)
    _emit(_csv_text(["field_T", "fmr_GHz"], rows), args.out)
    return 0


def _model_params(args):
    return DispersionModelParams(args.f_bm, args.g, magnon_shift=args.delta_m,
                                 hopfield_prefactor=args.d, model=args.model,
                                 literal_hopfield=args.literal_hopfield)


def cmd_dispersion(args, cfg):
    model = _model_params(args)
    if model.model is Model.DICKE_SUPERRADIANT and not model.g_over_omega > 0.5:
        raise PhaseValidityError("superradiant model needs g/omega > 0.5")
    params = _fmr_params(args, cfg)
    start, stop, steps = args.sweep or (10.0, 100.0, 91)
    fields = np.linspace(start, stop, steps) * 1e-3
    magnon = fmr_frequency_masked(fields, params)
    ok = np.isfinite(magnon)
    with np.errstate(invalid="ignore", divide="ignore"):
        lower, upper = branch_arrays(model, np.where(ok, magnon, 0.0))
    rows = [(float(h), float(m), float(lo), float(up))
            for h, m, lo, up, good in zip(fields, magnon, lower, upper, ok) if good]
    if not ok.all():
        print(f"dispersion: {int((~ok).sum())} unsaturated field values omitted", file=sys.stderr)
    _emit(_csv_text(["field_T", "fmr_GHz", "lower_GHz", "upper_GHz"], rows), args.out)
    return 0


def cmd_eta(args, cfg):
    maps = {str(p): FieldMap.from_json(p) for p in args.files}
    if len(maps) == 1:
        (name, fmap), = maps.items()
        eta = filling_factor(fmap, args.bias_axis)
        out = {"file": name, "eta": eta}
        if args.f_bm:
            res = evaluate_coupling(eta, args.f_bm, cfg.constants())
            out.update(g_over_2pi=res.g_over_2pi, g_over_omega=res.g_over_omega,
                       regime=res.regime.value)
    else:
        out = {"ranking": [{"file": n, "eta": e} for n, e in rank_field_maps(maps, args.bias_axis)]}
    _emit(_json_text(out), args.out)
    return 0


def cmd_coupling(args, cfg):
    constants = cfg.constants()
    out = {}
    if args.f_bm is not None:
        res = evaluate_coupling(args.eta, args.f_bm, constants)
        out.update(eta=res.eta, f_bm=args.f_bm, g_over_2pi=res.g_over_2pi,
                   g_over_omega=res.g_over_omega, regime=res.regime.value)
    out["dsc_threshold_GHz"] = dsc_threshold_frequency(args.eta, constants)
    _emit(_json_text(out), args.out)
    return 0


def cmd_simulate(args, cfg):
    model = _model_params(args)
    params = _fmr_params(args, cfg)
    h0, h1, nh = args.fields
    f0, f1, nf = args.freqs
    spectrum = synthesize(model, params, args.f_dm,
                      {"cavity": args.kappa_c, "magnon": args.kappa_m, "dark": args.kappa_d},
                      np.linspace(h0, h1, nh) * 1e-3, np.linspace(f0, f1, nf),
                      snr_db=args.snr_db, seed=args.seed)
    spectrum.to_csv(args.out)
    print(f"simulate: wrote {nh}x{nf} spectrum to {args.out} "
          f"({spectrum.metadata['n_masked']} unsaturated columns)", file=sys.stderr)
    return 0


def cmd_extract(args, cfg):
    spectrum = Spectrum2D.from_csv(args.spectrum)
    data = extract_branches(spectrum, args.threshold_db, absolute=args.absolute,
                            dark_freq=args.dark_freq)
    data.to_csv(args.out or sys.stdout)
    print(f"extract: {len(data)} points, {data.metadata['n_skipped']} columns skipped",
          file=sys.stderr)
    return 0


def cmd_fit(args, cfg):
    data = BranchData.from_csv(args.branches)
    if not args.no_symmetrize:
        data = symmetrize(data)
    model = Model.parse(args.model)
    fixed = dict(args.fix or [])
    guess = None
    if args.guess:
        try:
            guess = initial_guess(data)
        except CmpkitError:
            guess = {}
        guess.update({k: v for k, v in args.guess if v is not None})
    problem = FitProblem(data, model, _fmr_params(args, cfg), fixed=fixed,
                         initial_guess=guess, max_iter=cfg.max_iter,
                         xtol=cfg.xtol, gtol=cfg.gtol)
    result = fit(problem)
    _emit(_json_text(result.to_dict()), args.out)
    return 0 if result.converged else 1


def cmd_gap(args, cfg):
    if args.sweep:
        start, stop, steps = args.sweep
        curve = analysis.gap_curve(np.linspace(start, stop, steps), args.delta_over_omega)
        rows = [(float(a), float(b)) for a, b in curve]
        _emit(_csv_text(["g_over_omega", "gap_over_omega"], rows), args.out)
        return 0
    if args.f_bm is None or args.g is None:
        raise CmpkitError("gap needs --f-bm and --g (or --sweep)")
    params = DispersionModelParams(args.f_bm, args.g, args.delta_m)
    gap = zero_field_gap(params, args.zero_field_magnon)
    _emit(_json_text({"f_bm": args.f_bm, "g": args.g, "delta_m": args.delta_m,
                      "gap_GHz": gap, "gap_over_omega": gap / args.f_bm}), args.out)
    return 0


def cmd_analyze(args, cfg):
    records = analysis.read_tables(args.tables)
    fits = []
    for path in args.fits or []:
        fits.append(json.loads(Path(path).read_text()))
    summary = analysis.report(records, fits, out=args.out, plots_dir=args.plots)
    if not args.out:
        sys.stdout.write(_json_text(summary))
    return 0


def cmd_reproduce(args, cfg):
    out_dir = Path(args.out_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = analysis.read_tables()
    summary = analysis.report(records, out=out_dir / "report.json", plots_dir=out_dir / "plots")
    thr = {str(eta): dsc_threshold_frequency(eta, cfg.constants()) for eta in (1.0, 0.79)}
    cons, gap = summary["consistency"], summary["gap"]
    reg = summary["regression"]["delta_over_omega_vs_g_over_omega"]
    lines = [
        f"table consistency: {sum(r['consistent'] for r in summary['rows'])}/"
        f"{summary['n_records']} rows within {cons['tolerance']}",
        f"zero-field gap: {gap['n_within_tolerance']}/{summary['n_records']} within "
        f"{gap['tolerance']} GHz, {gap['n_within_tight_tolerance']} within {gap['tight_tolerance']} GHz",
        f"DSC threshold: eta=1 -> {thr['1.0']:.3f} GHz, eta=0.79 -> {thr['0.79']:.3f} GHz",
        f"Delta_m/omega vs g/omega: a={reg['a']:.4f} b={reg['b']:.4f} c={reg['c']:.4f} "
        f"R2={reg['r2']:.4f}",
        f"report: {out_dir / 'report.json'}",
    ]
    print("\n".join(lines))
    ok = (cons["all_consistent"] and gap["n_within_tolerance"] == summary["n_records"]
          and reg["a"] > 0)
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--gamma", type=float, help="gamma/2pi in GHz/T (default 28)")
    common.add_argument("--mu0-ms", type=float, help="saturation field mu0*Ms in T (default 0.176)")
    common.add_argument("--spin-density", type=float, help="spin density in m^-3")
    common.add_argument("--moment", type=float, help="moment per spin site in Bohr magnetons")
    common.add_argument("--lande-g", type=float)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized data")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-o", "--out", help="output file (default stdout)")

    sample = argparse.ArgumentParser(add_help=False)
    sample.add_argument("--dims-mm", type=float, nargs=3, metavar=("X", "Y", "Z"),
                        help="full prism edges in mm (default 0.61 6.09 3.82)")
    sample.add_argument("--bias-axis", default="z", choices=["x", "y", "z"])
    sample.add_argument("--average", type=int, metavar="N",
                        help="volume-average the demag tensor on an N^3 grid")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", default="shifted-dicke",
                       help="rwa | dicke | superradiant | hopfield | shifted-dicke")
    model.add_argument("--f-bm", type=float, required=True, help="cavity frequency [GHz]")
    model.add_argument("--g", type=float, required=True, help="coupling g/2pi [GHz]")
    model.add_argument("--delta-m", type=float, default=0.0, help="magnon shift [GHz]")
    model.add_argument("--d", type=float, default=1.0, help="Hopfield diamagnetic prefactor")
    model.add_argument("--literal-hopfield", action="store_true")

    parser = _Parser(prog="cmpkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("demag", parents=[common, sample], help="demagnetizing tensor as JSON")
    p.add_argument("--point-mm", type=float, nargs=3, metavar=("X", "Y", "Z"))
    p.set_defaults(func=cmd_demag)

    p = sub.add_parser("fmr", parents=[common, sample], help="FMR frequency sweep as CSV")
    p.add_argument("--field-sweep", type=_triple, default=(10.0, 500.0, 50),
                   metavar="START,STOP,STEPS", help="applied field sweep in mT")
    p.add_argument("--field-mode", choices=["applied", "internal"], default="applied")
    p.set_defaults(func=cmd_fmr)

    p = sub.add_parser("dispersion", parents=[common, sample, model], help="polariton branches as CSV")
    p.add_argument("--sweep", "--fmr-sweep", dest="sweep", type=_triple, nargs="?",
                   const=(10.0, 100.0, 91), metavar="START,STOP,STEPS",
                   help="applied field sweep in mT (default 10,100,91)")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("eta", parents=[common], help="filling factor of field-map JSON files")
    p.add_argument("files", nargs="+")
    p.add_argument("--bias-axis", default="z", choices=["x", "y", "z"])
    p.add_argument("--f-bm", type=float, help="also report g for this cavity frequency [GHz]")
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("coupling", parents=[common], help="coupling strength and DSC threshold")
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--f-bm", type=float, help="cavity frequency [GHz]")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("simulate", parents=[common, sample, model], help="synthetic |S21| spectrum CSV")
    p.add_argument("--f-dm", type=float, required=True, help="dark-mode frequency [GHz]")
    p.add_argument("--fields", type=_triple, default=(-400.0, 400.0, 201), metavar="START,STOP,N",
                   help="field axis in mT")
    p.add_argument("--freqs", type=_triple, default=(0.5, 12.0, 401), metavar="START,STOP,N",
                   help="frequency axis in GHz")
    p.add_argument("--kappa-c", type=float, default=0.15)
    p.add_argument("--kappa-m", type=float, default=0.15)
    p.add_argument("--kappa-d", type=float, default=0.1)
    p.add_argument("--snr-db", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", parents=[common], help="branch points from a spectrum CSV")
    p.add_argument("spectrum")
    p.add_argument("--threshold-db", type=float, default=-20.0)
    p.add_argument("--absolute", action="store_true", help="threshold is absolute, not relative to max")
    p.add_argument("--dark-freq", type=float)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", parents=[common, sample], help="fit branch CSV, print FitResult JSON")
    p.add_argument("branches")
    p.add_argument("--model", default="shifted-dicke")
    p.add_argument("--fix", type=_keyval, action="append", metavar="NAME[=VALUE]")
    p.add_argument("--guess", type=_keyval, action="append", metavar="NAME=VALUE")
    p.add_argument("--no-symmetrize", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gap", parents=[common], help="zero-field gap")
    p.add_argument("--f-bm", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--delta-m", type=float, default=0.0)
    p.add_argument("--zero-field-magnon", type=float, default=0.0)
    p.add_argument("--sweep", type=_triple, metavar="START,STOP,STEPS", help="g/omega sweep")
    p.add_argument("--delta-over-omega", type=float, default=0.3)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("analyze", parents=[common], help="table analysis report")
    p.add_argument("--tables", help="tables CSV (default: bundled cavity tables)")
    p.add_argument("--fits", nargs="*", help="FitResult JSON files to include")
    p.add_argument("--plots", help="directory for SVG plots")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", parents=[common], help="rerun the bundled table analysis")
    p.add_argument("--out-dir", help="output directory (default from config)")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, {
            "gamma": args.gamma, "mu0_ms": args.mu0_ms, "spin_density": args.spin_density,
            "moment": args.moment, "lande_g": args.lande_g,
        })
        return args.func(args, cfg)
    except (CmpkitError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
