"""Command-line interface: ``linepack {solve,bounds,certify,sweep,distortion}``.

Exit codes: 0 success, 1 solver failure, 2 usage or input error.

Frame files are JSON (``{"d", "N", "columns": [[re, im, ...] per column]}``)
or CSV (2d rows x N columns, rows alternating Re/Im of each coordinate).
Run records embed the best frame in the JSON format and can be passed
wherever a frame file is expected.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import analysis, beamforming, io
from .baseline import AltProjConfig, alternating_projection
from .frames import coherence, normalize_columns
from .solver import DEFAULT_EPS_TARGET, SolverConfig, default_threads, solve

log = logging.getLogger("linepack")

SWEEP_HEADER = ["N", "coherence", "coherence_monotone", "welch", "orthoplex", "levenshtein"]


class UsageError(Exception):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def parse_range(text: str) -> range:
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"invalid range {text!r}; expected a:b") from exc
    if lo < 1 or hi < lo:
        raise UsageError(f"invalid range {text!r}; need 1 <= a <= b")
    return range(lo, hi + 1)


def summary_line(d: int, N: int, coh: float, bound: float) -> str:
    return (f"d={d} N={N} coherence={io.fmt(coh)} lower_bound={io.fmt(bound)} "
            f"gap={io.fmt(coh - bound)}")


def run_solver(d: int, N: int, args) -> io.RunRecord:
    """Solve one (d, N) with the method and flags in ``args``; return the run record."""
    started = _now()
    if args.method == "altproj":
        if N < d:
            raise UsageError("altproj needs N >= d")
        result = alternating_projection(d, N, AltProjConfig(max_iters=args.max_iters), args.seed)
    else:
        cfg = SolverConfig(d=d, N=N, restarts=args.restarts, seed=args.seed,
                           eps_target=args.eps, threads=args.threads)
        result = solve(cfg)
    per_restart = [s.to_dict() for s in result.per_restart]
    return io.RunRecord(
        method=result.method, config=result.config_echo, per_restart=per_restart,
        best_frame=result.best_frame, best_coherence=result.best_coherence,
        bounds=analysis.bounds_report(d, N).to_dict(),
        certificates=analysis.certify(result.best_frame, args.tol),
        seed=args.seed, started_at=started, finished_at=_now(), wall_time=result.wall_time,
    )


def cmd_solve(args) -> int:
    try:
        record = run_solver(args.d, args.N, args)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        record.save(args.out)
    if args.frame_out:
        io.save_frame(record.best_frame, args.frame_out)
    print(summary_line(args.d, args.N, record.best_coherence, record.bounds["best_applicable"]))
    return 0


def bounds_rows(d: int, Ns) -> list[list[str]]:
    rows = []
    for N in Ns:
        b = analysis.bounds_report(d, N)
        rows.append([str(N), io.fmt(b.welch), io.fmt(b.orthoplex), io.fmt(b.levenshtein),
                     str(b.gerzon_max), io.fmt(b.best_applicable)])
    return rows


def cmd_bounds(args) -> int:
    if (args.N is None) == (args.N_range is None):
        raise UsageError("give exactly one of --N or --N-range")
    Ns = [args.N] if args.N is not None else parse_range(args.N_range)
    if args.N is not None and args.N < 1:
        raise UsageError("--N must be positive")
    header = ["N", "welch", "orthoplex", "levenshtein", "gerzon_max", "best_applicable"]
    rows = bounds_rows(args.d, Ns)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


def _load_normalized(path):
    frame = io.load_frame(path)
    return frame if frame.normalized else normalize_columns(frame)


def cmd_certify(args) -> int:
    frame = _load_normalized(args.input)
    report = analysis.certify(frame, args.tol)
    report["summary"] = summary_line(frame.d, frame.N, report["coherence"],
                                     report["bounds"]["best_applicable"])
    if args.reference is not None:
        report["reference"] = {"value": args.reference, "gap": report["coherence"] - args.reference}
    print(json.dumps(report, indent=1))
    return 0


def monotone_correction(Ns, values) -> list[float | None]:
    """Replace each value by the minimum over itself and all larger N.

    Dropping vectors never raises coherence, so a size-M result bounds every
    smaller size; the corrected column is non-decreasing in N and never above
    the raw one.  Missing values (``None``) stay missing.
    """
    out: list[float | None] = [None] * len(values)
    running = float("inf")
    for i in sorted(range(len(Ns)), key=lambda i: Ns[i], reverse=True):
        if values[i] is not None:
            running = min(running, values[i])
            out[i] = running
    return out


def cmd_sweep(args) -> int:
    Ns = list(parse_range(args.N_range))
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    done, coh = [], []
    failures = {}
    for N in Ns:
        try:
            record = run_solver(args.d, N, args)
        except (RuntimeError, UsageError, ValueError) as exc:
            failures[N] = str(exc)
            log.warning("N=%d failed: %s", N, exc)
            continue
        record.save(outdir / f"run_d{args.d}_N{N}.json")
        done.append(N)
        coh.append(record.best_coherence)
        log.info("%s", summary_line(args.d, N, record.best_coherence, record.bounds["best_applicable"]))
    mono = monotone_correction(done, coh)
    with open(outdir / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for N, c, m in zip(done, coh, mono):
            b = analysis.bounds_report(args.d, N)
            writer.writerow([N, io.fmt(c), io.fmt(m), io.fmt(b.welch), io.fmt(b.orthoplex),
                             io.fmt(b.levenshtein)])
    if failures:
        (outdir / "failures.json").write_text(json.dumps(failures, indent=1))
    print(f"sweep d={args.d}: {len(done)} of {len(Ns)} sizes solved -> {outdir / 'sweep.csv'}")
    return 0 if done else 1


def cmd_distortion(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if not (args.sigma > 0 and args.Es > 0):
        raise UsageError("--sigma and --Es must be positive")
    frame = _load_normalized(args.input)
    model = beamforming.ChannelModel(frame.d, noise_var=args.sigma, symbol_energy=args.Es)
    est, se = beamforming.distortion_mc(frame, args.samples, args.seed, workers=args.threads)
    out = {
        "estimate": est,
        "std_error": se,
        "samples": args.samples,
        "coherence_of_codebook": coherence(frame),
        "mean_snr": beamforming.mean_selected_snr(frame, min(args.samples, 1 << 16), model, args.seed),
    }
    print(json.dumps(out, indent=1))
    return 0


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linepack", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(sp):
        sp.add_argument("--restarts", type=_positive_int, default=20)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--eps", type=float, default=DEFAULT_EPS_TARGET,
                        help="target accuracy of the smooth maximum (sets the last smoothing level)")
        sp.add_argument("--method", choices=("trstmi", "altproj"), default="trstmi")
        sp.add_argument("--threads", type=_positive_int, default=default_threads(),
                        help="worker processes for restarts")
        sp.add_argument("--max-iters", type=_positive_int, default=5000, help="altproj iteration budget")
        sp.add_argument("--tol", type=float, default=analysis.DEFAULT_CERT_TOL,
                        help="certificate tolerance recorded in the run record")

    sp = sub.add_parser("solve", help="construct a low-coherence frame")
    sp.add_argument("--d", type=_positive_int, required=True)
    sp.add_argument("--N", type=_positive_int, required=True)
    sp.add_argument("--out", help="run record JSON path")
    sp.add_argument("--frame-out", help="also write the best frame (.json or .csv)")
    solver_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bounds", help="tabulate coherence lower bounds as CSV")
    sp.add_argument("--d", type=_positive_int, required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--N-range", dest="N_range", help="inclusive range a:b")
    sp.add_argument("--out", help="CSV path (default stdout)")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("certify", help="bounds, certificates and targets for a frame file")
    sp.add_argument("--in", dest="input", required=True, help="frame file (.json, .csv or run record)")
    sp.add_argument("--tol", type=float, default=analysis.DEFAULT_CERT_TOL)
    sp.add_argument("--reference", type=float, help="external coherence value to compare against")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("sweep", help="solve a range of N and write plot-ready CSV")
    sp.add_argument("--d", type=_positive_int, required=True)
    sp.add_argument("--N-range", dest="N_range", required=True, help="inclusive range a:b")
    sp.add_argument("--out", required=True, help="output directory")
    solver_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("distortion", help="Monte-Carlo quantization distortion of a codebook")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sigma", type=float, default=1.0, help="noise variance")
    sp.add_argument("--Es", type=float, default=1.0, help="symbol energy")
    sp.add_argument("--threads", type=_positive_int, default=1)
    sp.set_defaults(func=cmd_distortion)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"linepack: error: {exc}", file=sys.stderr)
        return 2
    except io.FrameFileError as exc:
        print(f"linepack: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"linepack: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
