"""CSV readers and writers for reports, ground truth, tracks and metrics."""

from __future__ import annotations

import csv
from collections import defaultdict

from .gmm import Peak
from .types import NoiseSpec, Report, TargetState

REPORT_FIELDS = ["step", "obs_id", "x", "y", "speed", "heading", "sx", "sy", "ss", "sh"]
TRUTH_FIELDS = ["step", "vehicle_id", "x", "y", "speed", "heading"]
TRACK_FIELDS = ["step", "n_hat", "peak_idx", "peak_x", "peak_y", "peak_mass"]
MIXTURE_FIELDS = ["step", "comp", "weight", "mx", "my", "cxx", "cxy", "cyy"]
PARTICLE_FIELDS = ["step", "x", "y", "speed", "heading", "weight"]
HEATMAP_FIELDS = ["step", "row", "col", "mass"]


def _f(v: float) -> str:
    return repr(float(v))


def _g(v: float) -> str:
    return f"{v:.6f}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _check_header(reader, expected, path):
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:len(expected)]] != expected:
        raise ValueError(f"{path}: expected header {','.join(expected)}, got {reader.fieldnames}")


def write_reports(reports_by_step, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(REPORT_FIELDS)
        for step, reports in enumerate(reports_by_step):
            for i, r in enumerate(reports):
                o, n = r.observed, r.noise
                w.writerow([step, i, _f(o.x), _f(o.y), _f(o.speed), _f(o.heading),
                            *(_f(v) for v in n.as_tuple())])


def read_reports(path, steps: int | None = None) -> list:
    """Reports grouped by step; the list has ``steps`` entries (default: last step + 1)."""
    by_step = defaultdict(list)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, REPORT_FIELDS, path)
        for lineno, row in enumerate(reader, 2):
            try:
                step = int(row["step"])
                state = TargetState(float(row["x"]), float(row["y"]), float(row["speed"]),
                                    float(row["heading"]))
                noise = NoiseSpec(*(float(row[k]) for k in ("sx", "sy", "ss", "sh")))
                by_step[step].append((int(row["obs_id"]), Report(step, state, noise)))
            except (TypeError, ValueError) as e:
                raise ValueError(f"{path} line {lineno}: {e}") from None
    n = steps if steps is not None else (max(by_step) + 1 if by_step else 0)
    return [[r for _, r in sorted(by_step.get(s, []), key=lambda t: t[0])] for s in range(n)]


def write_truth(truth, path) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRUTH_FIELDS)
        for step, alive in enumerate(truth.states):
            for vid, s in alive:
                w.writerow([step, vid, _f(s.x), _f(s.y), _f(s.speed), _f(s.heading)])


def read_truth(path) -> list:
    """Per step: list of (vehicle_id, TargetState).  Steps without vehicles are kept."""
    by_step = defaultdict(list)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, TRUTH_FIELDS, path)
        for lineno, row in enumerate(reader, 2):
            try:
                by_step[int(row["step"])].append(
                    (int(row["vehicle_id"]), TargetState(float(row["x"]), float(row["y"]),
                                                         float(row["speed"]), float(row["heading"]))))
            except (TypeError, ValueError) as e:
                raise ValueError(f"{path} line {lineno}: {e}") from None
    n = max(by_step) + 1 if by_step else 0
    return [by_step.get(s, []) for s in range(n)]


def write_tracks(outputs, path) -> None:
    """One row per peak per step; a step without peaks gets a ``peak_idx=-1`` row."""
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(TRACK_FIELDS)
        for out in outputs:
            if not out.peaks:
                w.writerow([out.step, _g(out.expected_count), -1, "", "", ""])
            for i, p in enumerate(out.peaks):
                w.writerow([out.step, _g(out.expected_count), i, _g(p.x), _g(p.y), _g(p.mass)])


def read_tracks(path) -> dict:
    """step -> (n_hat, [Peak, ...])."""
    out: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        _check_header(reader, TRACK_FIELDS, path)
        for lineno, row in enumerate(reader, 2):
            try:
                step = int(row["step"])
                n_hat, peaks = out.setdefault(step, (float(row["n_hat"]), []))
                if int(row["peak_idx"]) >= 0:
                    peaks.append(Peak(float(row["peak_x"]), float(row["peak_y"]),
                                      float(row["peak_mass"])))
            except (TypeError, ValueError) as e:
                raise ValueError(f"{path} line {lineno}: {e}") from None
    return out


def write_metrics(metrics, vehicle_ids, path, with_ospa: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["step", "n_true", "n_hat"] + [f"err_v{v}" for v in vehicle_ids]
                   + (["ospa"] if with_ospa else []))
        for m in metrics:
            errs = []
            for v in vehicle_ids:
                e = m.errors.get(v)
                errs.append("" if e is None else _g(e))
            row = [m.step, m.n_true, _g(m.n_hat)] + errs
            if with_ospa:
                row.append("" if m.ospa is None else _g(m.ospa))
            w.writerow(row)


class StepDumper:
    """Optional per-step dumps (mixtures, particles, heat maps) to open CSV files."""

    def __init__(self, mixture=None, particles=None, heatmap=None, tmap=None):
        self.files = []
        self.mixture = self._open(mixture, MIXTURE_FIELDS)
        self.particles = self._open(particles, PARTICLE_FIELDS)
        self.heatmap = self._open(heatmap, HEATMAP_FIELDS)
        self.tmap = tmap

    def _open(self, path, header):
        if path is None:
            return None
        fh = open(path, "w", newline="")
        self.files.append(fh)
        w = _writer(fh)
        w.writerow(header)
        return w

    def dump(self, out, mixture) -> None:
        from .gmm import mass_grid
        cloud = out.posterior.cloud
        if self.mixture is not None and mixture is not None:
            for j, (wt, mu, cov) in enumerate(mixture.components):
                self.mixture.writerow([out.step, j, _g(wt), _g(mu[0]), _g(mu[1]),
                                       _g(cov[0, 0]), _g(cov[0, 1]), _g(cov[1, 1])])
        if self.particles is not None:
            for s, wt in zip(cloud.states, cloud.weights):
                self.particles.writerow([out.step, _g(s[0]), _g(s[1]), _g(s[2]), _g(s[3]),
                                         f"{wt:.9g}"])
        if self.heatmap is not None and self.tmap is not None and len(cloud):
            for r, c, m in zip(*mass_grid(cloud, self.tmap)):
                self.heatmap.writerow([out.step, int(r), int(c), f"{m:.9g}"])

    def close(self) -> None:
        for fh in self.files:
            fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
