"""Command-line driver: ``genmap``, ``simulate``, ``track`` and ``eval``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import csvio
from .evaluation import format_summary, summarize
from .models import TerrainModel
from .resampling import SCHEMES
from .scenario import generate_reports, genmap, read_scenario, simulate
from .streams import KeyedStream
from .terrain import read_map, write_map
from .tracking import mean_timings, run_bootstrap, run_phd, score
from .types import FilterParams

log = logging.getLogger("phdtrack")


class UsageError(Exception):
    pass


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1), got {text}")
    return v


def cmd_genmap(args) -> int:
    tmap = genmap(args.width, args.height, args.cell, KeyedStream(args.seed).child("map").generator())
    write_map(tmap, args.out)
    frac = tmap.fractions()
    log.info("wrote %s: %dx%d cells, road %.1f%%, field %.1f%%", args.out, tmap.width,
             tmap.height, 100 * frac[0], 100 * frac[1])
    return 0


def cmd_simulate(args) -> int:
    sc = read_scenario(args.scenario)
    p_fn = sc.p_fn if args.pfn is None else args.pfn
    if args.map:
        tmap = read_map(args.map)
        w, h = tmap.extent
        for v in sc.vehicles:
            for x, y in v.waypoints:
                if not (tmap.origin_x <= x < tmap.origin_x + w and tmap.origin_y <= y < tmap.origin_y + h):
                    log.warning("vehicle %d waypoint (%g, %g) lies off the map", v.vehicle_id, x, y)
    root = KeyedStream(args.seed)
    truth = simulate(sc.vehicles, sc.dt, root.child("scenario").generator(), sc.steps)
    reports = generate_reports(truth, p_fn, sc.sigma_r, root.child("reports").generator())
    csvio.write_truth(truth, args.truth)
    csvio.write_reports(reports, args.reports)
    log.info("simulated %d steps, %d reports (p_fn=%g)", truth.steps,
             sum(len(r) for r in reports), p_fn)
    return 0


def cmd_track(args) -> int:
    if args.pfn is None or not 0.0 < args.pfn < 1.0:
        raise UsageError("track needs --pfn strictly between 0 and 1")
    params = FilterParams(n_per_unit=args.particles, p_fn=args.pfn, k_const=args.k_const,
                          max_count=args.max_count, dt=args.dt)
    tmap = read_map(args.map)
    reports = csvio.read_reports(args.reports, args.steps)
    model = TerrainModel.from_params(params, tmap, mode=args.terrain_mode, workers=args.workers)

    out = Path(args.out)
    particles = out.with_suffix(".particles.csv") if args.dump_particles else None
    with csvio.StepDumper(args.mixture, particles, args.heatmap, tmap) as dumper:
        if args.filter == "bootstrap":
            outputs = run_bootstrap(reports, params, model, args.seed, args.resample, dumper)
        else:
            outputs = run_phd(reports, params, model, args.seed, args.resample, dumper)
    csvio.write_tracks(outputs, out)

    if args.timing:
        keys = sorted({k for o in outputs for k in o.timings})
        with open(args.timing, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step"] + keys)
            for o in outputs:
                w.writerow([o.step] + [f"{o.timings.get(k, 0.0):.6f}" for k in keys])
    times = mean_timings(outputs)
    log.info("tracked %d steps; mean seconds per step: %s", len(outputs),
             ", ".join(f"{k}={v:.4f}" for k, v in times.items()))
    return 0


def cmd_eval(args) -> int:
    truth = csvio.read_truth(args.truth)
    tracks = csvio.read_tracks(args.tracks)
    outputs = []
    for step, (n_hat, peaks) in tracks.items():
        outputs.append(_TrackRow(step, n_hat, peaks))
    n_steps = max(len(truth), max(tracks, default=-1) + 1)
    truth = truth + [[] for _ in range(n_steps - len(truth))]
    metrics = score(truth, outputs, args.ospa)
    ids = sorted({vid for alive in truth for vid, _ in alive})
    csvio.write_metrics(metrics, ids, args.out, args.ospa)
    text = format_summary(summarize(metrics))
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


class _TrackRow:
    def __init__(self, step, n_hat, peaks):
        self.step, self.expected_count, self.peaks = step, n_hat, peaks


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phdtrack", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genmap", help="generate a synthetic terrain map")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--width", type=int, default=400)
    g.add_argument("--height", type=int, default=400)
    g.add_argument("--cell", type=float, default=25.0)
    g.set_defaults(func=cmd_genmap)

    s = sub.add_parser("simulate", help="simulate ground truth and observer reports")
    s.add_argument("--map")
    s.add_argument("--scenario", default="bundled", help="scenario file, or 'bundled' for the built-in scenario")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--pfn", type=_probability)
    s.add_argument("--truth", required=True)
    s.add_argument("--reports", required=True)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("track", help="run the PHD (or bootstrap) filter over a report file")
    t.add_argument("--map", required=True)
    t.add_argument("--reports", required=True)
    t.add_argument("--pfn", type=_probability, required=True)
    t.add_argument("--particles", type=int, default=1000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--resample", choices=SCHEMES, default="multinomial")
    t.add_argument("--terrain-mode", choices=("resample", "reweight"), default="resample")
    t.add_argument("--filter", choices=("phd", "bootstrap"), default="phd")
    t.add_argument("--dump-particles", action="store_true")
    t.add_argument("--heatmap")
    t.add_argument("--mixture")
    t.add_argument("--timing")
    t.add_argument("--steps", type=int)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--k-const", type=float, default=0.01)
    t.add_argument("--max-count", type=float, default=5.0)
    t.add_argument("--dt", type=float, default=5.0)
    t.set_defaults(func=cmd_track)

    e = sub.add_parser("eval", help="score tracks against ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--tracks", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--summary")
    e.add_argument("--ospa", action="store_true", help="add an OSPA column (not used for acceptance)")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as e:
        parser.error(str(e))
    except (OSError, ValueError) as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
