"""Command-line front end.

Exit codes: 0 ok, 2 bad flags, 3 censored samples where an MFPT was needed,
4 numerical blowup, 5 too few histogram peaks for a decay fit,
6 renewal oracle disagreement.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict
from pathlib import Path

from . import __version__, _backend
from .analysis import (
    find_minima,
    parse_grid,
    sweep_deterministic,
    sweep_initial_condition,
    sweep_noise,
    sweep_poisson,
)
from .dynamics import NumericalBlowupError, SimParams
from .engine import CensoredSamplesError, FptSamples, run_ensemble
from .potential import InvalidSpecError, PotentialSpec
from .resetting import Deterministic, NoReset, Poisson, ResetPoint, parse_schedule
from .rng import derive_seed
from .stats import (
    InsufficientPeaksError,
    NoSuccessfulAttemptError,
    bootstrap_renewal,
    build_histogram,
    detect_peaks,
    fit_exponential_decay,
    strongest_per_period,
    summarize,
    z_score,
)

log = logging.getLogger("kramers_reset")

EXIT_OK, EXIT_USAGE, EXIT_CENSORED, EXIT_BLOWUP, EXIT_PEAKS, EXIT_ORACLE = 0, 2, 3, 4, 5, 6

DEFAULT_TR_GRID = "1:0.2:8"
DEFAULT_THETA_GRID = "1:0.5:12"
DEFAULT_EPS_GRID = "1.296:0.18:2.376"
DEFAULT_X0_GRID = "-2.9:0.1:5.9"


class UsageError(Exception):
    pass


def _schedule_arg(text):
    try:
        return parse_schedule(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _grid_arg(text):
    try:
        return parse_grid(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("model")
    g.add_argument("--alpha", type=float, default=6.0)
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--eta", type=float, default=0.1)
    g.add_argument("--eps", type=float, default=1.8)
    g.add_argument("--noise", choices=("amplitude", "intensity"), default="amplitude",
                   help="eps multiplies dW (amplitude) or sqrt(eps) does (intensity)")
    g.add_argument("--x0", type=float, default=-2.899)
    g.add_argument("--v0", type=float, default=0.0)
    g.add_argument("--dt", type=float, default=1e-3)
    g.add_argument("--t-max", type=float, default=1e5)
    g.add_argument("--absorb-x", type=float, default=None, help="default: barrier top alpha/beta")
    g.add_argument("--validate-x", type=float, default=100.0)
    r = p.add_argument_group("run")
    r.add_argument("--n", type=int, default=10_000, help="trajectories per ensemble")
    r.add_argument("--seed", type=int, default=42)
    r.add_argument("--threads", type=int, default=None, help="default: $KRAMERS_RESET_THREADS or 1")
    r.add_argument("--backend", choices=("compiled", "python"), default=None)
    r.add_argument("--out-dir", type=Path, default=Path("."))
    r.add_argument("--format", choices=("csv", "json", "both"), default="both")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kramers-reset", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one ensemble and summarize it")
    _common(p)
    p.add_argument("--reset", type=_schedule_arg, default=NoReset(), help="none | det:T | poisson:R")
    p.add_argument("--reset-x", type=float, default=None, help="reset position (default: x0)")

    p = sub.add_parser("sweep", help="MFPT against a control parameter")
    p.add_argument("kind", choices=("tr", "rate", "noise", "x0"))
    _common(p)
    p.add_argument("--grid", type=_grid_arg, default=None, help="start:step:stop or comma list")
    p.add_argument("--theta-grid", type=_grid_arg, default=None, help="mean reset intervals for 'rate'")
    p.add_argument("--reset-x", type=float, default=None)
    p.add_argument("--no-prescreen", action="store_true",
                   help="simulate every t_r even when no reset-free sample escapes before it")

    p = sub.add_parser("histogram", help="FPT histogram, optional wave-peak decay fit")
    _common(p)
    p.add_argument("--samples", type=Path, default=None, help="samples CSV/JSON instead of simulating")
    p.add_argument("--reset", type=_schedule_arg, default=NoReset())
    p.add_argument("--reset-x", type=float, default=None)
    p.add_argument("--bin-width", type=float, default=0.25)
    p.add_argument("--peak-window", type=int, default=2)
    p.add_argument("--fit-decay", action="store_true")
    p.add_argument("--unweighted", action="store_true", help="plain log-linear fit")

    p = sub.add_parser("oracle-check", help="direct resetting MFPT against the renewal prediction")
    _common(p)
    p.add_argument("--samples", type=Path, required=True, help="reset-free samples CSV/JSON")
    p.add_argument("--kind", choices=("det", "poisson"), default="det")
    p.add_argument("--grid", type=_grid_arg, required=True, help="periods (det) or rates (poisson)")
    p.add_argument("--n-boot", type=int, default=200)

    p = sub.add_parser("rerun", help="re-execute the command recorded in a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out-dir", type=Path, default=None)
    return ap


# -- helpers ---------------------------------------------------------------------


def _model(args) -> tuple[PotentialSpec, SimParams]:
    spec = PotentialSpec(args.alpha, args.beta).validate()
    params = SimParams(eta=args.eta, eps=args.eps, x0=args.x0, v0=args.v0, dt=args.dt, t_max=args.t_max,
                       absorb_x=args.absorb_x, validate_x=args.validate_x, noise=args.noise)
    return spec, params.resolved(spec)


def _write(out_dir: Path, stem: str, fmt: str, csv_text: str | None, json_text: str | None) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both") and csv_text is not None:
        path = out_dir / f"{stem}.csv"
        path.write_text(csv_text, newline="\n")
        written.append(str(path))
    if fmt in ("json", "both") and json_text is not None:
        path = out_dir / f"{stem}.json"
        path.write_text(json_text + "\n", newline="\n")
        written.append(str(path))
    return written


def _manifest(args, argv, spec, params, schedule_literal, outputs, started) -> dict:
    return {
        "tool": "kramers-reset",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "potential": asdict(spec),
        "params": asdict(params),
        "schedule": schedule_literal,
        "master_seed": args.seed,
        "n_traj": args.n,
        "backend": args.backend or _backend.default_name(),
        "threads": _backend.resolve_threads(args.threads),
        "wall_seconds": time.time() - started,
        "outputs": outputs,
    }


def _write_manifest(args, argv, spec, params, schedule_literal, outputs, started):
    doc = _manifest(args, argv, spec, params, schedule_literal, outputs, started)
    path = args.out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", newline="\n")
    return path


def _fmt_stats(label, st) -> str:
    return (f"{label}: N={st.n} MFPT={st.mean!r} sigma={st.std_dev!r} CV={st.cv!r} "
            f"CI95=+/-{st.ci95_half_width!r}")


def _load_samples(path: Path, args) -> FptSamples:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return FptSamples.from_json(text)
    spec, params = _model(args)
    return FptSamples.from_csv(text, params=params, master_seed=args.seed, spec=spec)


# -- commands --------------------------------------------------------------------


def cmd_simulate(args, argv) -> int:
    started = time.time()
    spec, params = _model(args)
    rp = ResetPoint(args.reset_x if args.reset_x is not None else params.x0)
    samples = run_ensemble(spec, params, args.reset, rp, args.n, args.seed,
                           threads=args.threads, backend=args.backend)
    outputs = _write(args.out_dir, "samples", args.format, samples.to_csv(), samples.to_json())
    _write_manifest(args, argv, spec, params, args.reset.literal, outputs, started)
    print(f"params: {json.dumps(asdict(params), sort_keys=True)} schedule={args.reset.literal} seed={args.seed}")
    print(_fmt_stats("summary", summarize(samples)))
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    started = time.time()
    spec, params = _model(args)
    rp = ResetPoint(args.reset_x) if args.reset_x is not None else None
    kw = dict(threads=args.threads, backend=args.backend)
    outputs = []
    if args.kind == "tr":
        grid = args.grid or parse_grid(DEFAULT_TR_GRID)
        curve = sweep_deterministic(spec, params, rp, grid, args.n, args.seed,
                                    prescreen=not args.no_prescreen, **kw)
        curves = [("sweep_tr", curve)]
    elif args.kind == "rate":
        grid = args.theta_grid or args.grid or parse_grid(DEFAULT_THETA_GRID)
        curves = [("sweep_rate", sweep_poisson(spec, params, rp, grid, args.n, args.seed, **kw))]
    elif args.kind == "noise":
        grid = args.grid or parse_grid(DEFAULT_EPS_GRID)
        curves = [("sweep_noise", sweep_noise(spec, params, grid, args.n, args.seed, **kw))]
    else:
        grid = args.grid or parse_grid(DEFAULT_X0_GRID)
        mfpt, cv = sweep_initial_condition(spec, params, grid, args.n, args.seed, **kw)
        curves = [("sweep_x0_mfpt", mfpt), ("sweep_x0_cv", cv)]

    for stem, curve in curves:
        outputs += _write(args.out_dir, stem, args.format, curve.to_csv(), curve.to_json())
        for c, reason in curve.skipped:
            print(f"skipped {curve.control_name}={c!r}: {reason}")
        if len(curve.points) >= 3:
            rep = find_minima(curve)
            outputs += _write(args.out_dir, stem + "_minima", args.format, rep.to_csv(), rep.to_json())
            print(f"{stem}: global minimum {rep.global_min} local minima {rep.local_minima} "
                  f"ratio to baseline {rep.ratio_at_global}")
        for c, st in curve.points:
            print(_fmt_stats(f"  {curve.control_name}={c!r}", st))
    _write_manifest(args, argv, spec, params, f"sweep:{args.kind}", outputs, started)
    return EXIT_OK


def cmd_histogram(args, argv) -> int:
    started = time.time()
    spec, params = _model(args)
    if args.samples is not None:
        samples = _load_samples(args.samples, args)
        literal = samples.schedule.literal
    else:
        rp = ResetPoint(args.reset_x if args.reset_x is not None else params.x0)
        samples = run_ensemble(spec, params, args.reset, rp, args.n, args.seed,
                               threads=args.threads, backend=args.backend)
        literal = args.reset.literal
    hist = build_histogram(samples, args.bin_width)
    outputs = _write(args.out_dir, "histogram", args.format, hist.to_csv(), hist.to_json())
    lead = next((i for i, f in enumerate(hist.rf) if f > 0), 0)
    print(f"histogram: {len(hist.rf)} bins of width {args.bin_width!r}; first {lead} bins empty "
          f"(no escape before t={lead * args.bin_width!r})")
    if args.fit_decay:
        peaks = detect_peaks(hist, args.peak_window)
        if isinstance(samples.schedule, Deterministic):
            peaks = strongest_per_period(peaks, samples.schedule.t_r)
        peak_csv = "time,relative_frequency\n" + "".join(f"{t!r},{f!r}\n" for t, f in peaks)
        outputs += _write(args.out_dir, "peaks", "csv" if args.format != "json" else "json",
                          peak_csv, json.dumps([list(p) for p in peaks]))
        fit = fit_exponential_decay(peaks, weighted=not args.unweighted)
        outputs += _write(args.out_dir, "decay_fit", args.format, fit.to_csv(), fit.to_json())
        print(f"decay fit over {fit.n_points} peaks: RF = {fit.a!r} * exp(-{fit.b!r} t), R^2 = {fit.r_squared!r}")
    _write_manifest(args, argv, spec, params, literal, outputs, started)
    return EXIT_OK


def cmd_oracle_check(args, argv) -> int:
    started = time.time()
    base = _load_samples(args.samples, args)
    spec, params = base.spec, base.params
    rows = []
    worst = 0.0
    for i, value in enumerate(args.grid):
        row = {"control": value}
        try:
            pred = bootstrap_renewal(base, args.kind, value, args.n_boot, seed=args.seed)
        except NoSuccessfulAttemptError as e:
            row.update(error=str(e))
            rows.append(row)
            print(f"{args.kind} {value!r}: {e}")
            continue
        sched = Deterministic(value) if args.kind == "det" else Poisson(value)
        direct = summarize(run_ensemble(spec, params, sched, base.reset_point, args.n,
                                        derive_seed(args.seed, 0x0AC1E, i),
                                        threads=args.threads, backend=args.backend))
        z = z_score(direct, pred)
        worst = max(worst, abs(z))
        row.update(direct=direct.mean, direct_se=direct.std_error, predicted=pred.mfpt,
                   predicted_se=pred.std_error, z=z)
        rows.append(row)
        print(f"{args.kind} {value!r}: direct {direct.mean:.6g} +/- {direct.std_error:.3g}  "
              f"renewal {pred.mfpt:.6g} +/- {pred.std_error:.3g}  z={z:+.3f}")
    cols = ["control", "direct", "direct_se", "predicted", "predicted_se", "z", "error"]
    csv_text = ",".join(cols) + "\n" + "".join(
        ",".join("" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else str(r[c]).replace(",", ";"))
                 for c in cols) + "\n" for r in rows)
    outputs = _write(args.out_dir, "oracle", args.format, csv_text,
                     json.dumps({"kind": args.kind, "rows": rows}, indent=2, sort_keys=True))
    _write_manifest(args, argv, spec, params, f"oracle:{args.kind}", outputs, started)
    if worst > 3.0:
        print(f"oracle disagreement: max |z| = {worst:.3f} > 3")
        return EXIT_ORACLE
    return EXIT_OK


def cmd_rerun(args, argv) -> int:
    doc = json.loads(args.manifest.read_text())
    new_argv = list(doc["argv"])
    if args.out_dir is not None:
        new_argv += ["--out-dir", str(args.out_dir)]
    return main(new_argv)


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "histogram": cmd_histogram,
    "oracle-check": cmd_oracle_check,
    "rerun": cmd_rerun,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except (CensoredSamplesError,) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CENSORED
    except NumericalBlowupError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BLOWUP
    except InsufficientPeaksError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PEAKS
    except (ValueError, InvalidSpecError, UsageError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
