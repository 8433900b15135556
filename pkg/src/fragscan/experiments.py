"""Parameter sweeps, throughput benchmarks and stress-injection evaluation."""

from __future__ import annotations

import gc
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .corpus import Label, Manifest, entry_seed
from .detector import (
    DETECTOR_KINDS,
    Detector,
    DetectorParams,
    fragment_offsets,
    fragment_rng,
    preset,
    read_source,
)
from .entropy import DEFAULT_REFERENCE_SEED, MAX_FRAGMENT, STEP, ReferenceFragment
from .errors import EmptyCorpusError, ParameterError
from .forge import STRESS_INJECTION_GRID, STRESS_JUMP_GRID, StressSpec, stress_inject
from .metrics import MetricsReport

log = logging.getLogger(__name__)

DEFAULT_LENGTHS = tuple(range(8, 257, 8))
DEFAULT_THRESHOLDS = tuple(range(2, 61, 2))
DEFAULT_DISTANCES = tuple(range(2, 81, 2))


@dataclass(frozen=True)
class SweepPoint:
    params: DetectorParams
    metrics: MetricsReport

    def row(self) -> tuple:
        m = self.metrics
        return (self.params.name, self.params.length, self.params.threshold, self.params.distance,
                m.accuracy, m.precision, m.recall, m.f1, m.tp, m.fp, m.tn, m.fn, m.skipped)


SWEEP_COLUMNS = ("detector", "length", "threshold", "distance", "accuracy", "precision",
                 "recall", "f1", "tp", "fp", "tn", "fn", "skipped")


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    best: tuple[SweepPoint, ...]  # every coordinate tied at the top accuracy

    @property
    def best_accuracy(self) -> float:
        return self.best[0].metrics.accuracy

    def best_lengths(self) -> set[int]:
        return {p.params.length for p in self.best}

    def accuracy_grid(self) -> dict[tuple[int, float, float], float]:
        return {(p.params.length, p.params.threshold, p.params.distance): p.metrics.accuracy
                for p in self.points}


@dataclass
class _FileAreas:
    """Per-length areas for one file: header area, other areas, fallback."""

    skipped: bool
    header: dict[int, float] = field(default_factory=dict)
    others: dict[int, Optional[list[float]]] = field(default_factory=dict)


def _file_areas(data: np.ndarray, key: str, fragments: int, lengths: Sequence[int],
                seed: int, reference: ReferenceFragment) -> _FileAreas:
    if data.size < STEP:
        return _FileAreas(True)
    ref = reference.curve.values
    head_points = min(MAX_FRAGMENT, data.size - data.size % STEP) // STEP
    cum = _kernels.cumulative_fragment_areas(data, 0, head_points, _kernels.NLOGN, ref)
    out = _FileAreas(False)
    for o in lengths:
        out.header[o] = float(cum[min(o // STEP, head_points) - 1])
        if fragments == 1:
            continue
        params = DetectorParams(o, 0, 0, fragments, seed)
        if data.size < params.min_size():
            out.others[o] = None
            continue
        starts = fragment_offsets(data.size, params, fragment_rng(seed, key))[1:]
        areas = _kernels.fragment_areas(data, np.asarray(starts, dtype=np.int64), o // STEP,
                                        _kernels.NLOGN, ref)
        out.others[o] = areas.tolist()
    return out


def _areas_for_entry(args) -> _FileAreas:
    path, key, fragments, lengths, seed = args
    reference = ReferenceFragment.from_seed(seed)
    return _file_areas(read_source(path), key, fragments, lengths, seed, reference)


def _selected(header: np.ndarray, others: Optional[np.ndarray], fragments: int,
              distances: np.ndarray) -> np.ndarray:
    """Selected area per (distance, file); mirrors select_area / select_mean_area."""
    h = np.broadcast_to(header, (distances.size, header.size))
    if fragments == 1 or others is None:
        return h.copy()
    d = distances[:, None]
    if fragments == 2:
        r = others[:, 0][None, :]
        keep = (h > r) & (h - d < r)
        return np.where(keep, h, np.minimum(h, r))
    total = others[:, 0].copy()
    for j in range(1, others.shape[1]):
        total = total + others[:, j]
    avg = (total / others.shape[1])[None, :]
    return np.where(h - d < avg, h, np.minimum(avg, h))


def sweep(
    manifest: Manifest,
    kind: str | int,
    lengths: Sequence[int] = DEFAULT_LENGTHS,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    distances: Sequence[float] = DEFAULT_DISTANCES,
    seed: int = DEFAULT_REFERENCE_SEED,
    workers: int = 1,
) -> SweepResult:
    """Score every (length, threshold, distance) coordinate on the corpus.

    Each file's header curve is computed once; random-fragment areas once
    per length, since fragment offsets depend on the length. Distances are
    ignored for DAA.
    """
    fragments = DETECTOR_KINDS[kind.lower()] if isinstance(kind, str) else int(kind)
    if not manifest.entries:
        raise EmptyCorpusError("cannot sweep an empty corpus")
    if not (lengths and thresholds and distances):
        raise ParameterError("sweep grids must be non-empty")
    for o in lengths:
        DetectorParams(o, 0, 0, fragments, seed)
    lengths = sorted(set(int(o) for o in lengths))
    thresholds = sorted(set(thresholds))
    distances = [0] if fragments == 1 else sorted(set(distances))

    jobs = [(manifest.resolve(e), e.path, fragments, lengths, seed) for e in manifest.entries]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_file = list(pool.map(_areas_for_entry, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        reference = ReferenceFragment.from_seed(seed)
        per_file = [_file_areas(read_source(p), k, f, ls, s, reference) for p, k, f, ls, s in jobs]

    labels = np.array([e.label is Label.ENCRYPTED for e in manifest.entries])
    scored = np.array([not fa.skipped for fa in per_file])
    skipped = int((~scored).sum())
    truth = labels[scored]
    files = [fa for fa in per_file if not fa.skipped]
    t_arr = np.asarray(thresholds, dtype=np.float64)[:, None, None]
    d_arr = np.asarray(distances, dtype=np.float64)

    points = []
    for o in lengths:
        header = np.array([fa.header[o] for fa in files])
        selected = np.empty((d_arr.size, len(files)))
        if fragments == 1:
            selected[:] = header
        else:
            full = np.array([fa.others[o] is not None for fa in files], dtype=bool)
            selected[:, ~full] = header[~full]
            if full.any():
                others = np.array([fa.others[o] for fa in files if fa.others[o] is not None])
                selected[:, full] = _selected(header[full], others, fragments, d_arr)
        flagged = selected[None, :, :] < t_arr  # (threshold, distance, file)
        tp = (flagged & truth).sum(-1)
        fp = (flagged & ~truth).sum(-1)
        fn = (~flagged & truth).sum(-1)
        tn = (~flagged & ~truth).sum(-1)
        for i, t in enumerate(thresholds):
            for j, d in enumerate(distances):
                params = DetectorParams(o, t, d, fragments, seed)
                metrics = MetricsReport(int(tp[i, j]), int(fp[i, j]), int(tn[i, j]), int(fn[i, j]), skipped)
                points.append(SweepPoint(params, metrics))
    top = max(p.metrics.accuracy for p in points)
    best = tuple(p for p in points if p.metrics.accuracy == top)
    return SweepResult(tuple(points), best)


# -- throughput --------------------------------------------------------------


@dataclass(frozen=True)
class ThroughputReport:
    detector: str
    files_per_second: float
    corpus_size: int
    wall_time: float  # median over repetitions, seconds
    repetitions: int
    workers: int = 1
    params: Optional[DetectorParams] = None
    times: tuple[float, ...] = ()

    def row(self) -> tuple:
        return (self.detector, self.files_per_second, self.corpus_size, self.wall_time,
                self.repetitions, self.workers)


BENCH_COLUMNS = ("detector", "files_per_second", "corpus_size", "wall_time_s", "repetitions", "workers")


def _timed_pass(detector: Detector, paths: Sequence[tuple[str, str]]) -> float:
    classify = detector.classify
    start = time.perf_counter()
    for path, key in paths:
        classify(path, key)
    return time.perf_counter() - start


def bench(
    manifest: Manifest,
    detectors: Mapping[str, DetectorParams] | Sequence[str],
    repetitions: int = 10,
    chunk: int = 16,
) -> list[ThroughputReport]:
    """End-to-end files/second (open, read whole file, classify) per detector.

    Every file is read once beforehand so all timed passes run against a warm
    page cache. Within a repetition the corpus is walked in chunks of
    ``chunk`` files and every detector times each chunk, in rotating order,
    so machine-load drift hits all detectors alike. A detector's time for the
    repetition is the sum over chunks; the reported wall time is the median
    over repetitions.
    """
    if repetitions < 1:
        raise ParameterError("repetitions must be >= 1")
    if chunk < 1:
        raise ParameterError("chunk must be >= 1")
    if not manifest.entries:
        raise EmptyCorpusError("cannot benchmark an empty corpus")
    if not isinstance(detectors, Mapping):
        detectors = {preset(k).name: preset(k) for k in detectors}
    built = {name: Detector(params) for name, params in detectors.items()}
    paths = [(str(manifest.resolve(e)), e.path) for e in manifest.entries]
    for path, _ in paths:
        read_source(path)
    for det in built.values():
        _timed_pass(det, paths[: min(len(paths), 20)])

    names = list(built)
    chunks = [paths[i : i + chunk] for i in range(0, len(paths), chunk)]
    times = {name: [] for name in names}
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        turn = 0
        for _ in range(repetitions):
            spent = dict.fromkeys(names, 0.0)
            for part in chunks:
                r = turn % len(names)
                for name in names[r:] + names[:r]:
                    spent[name] += _timed_pass(built[name], part)
                turn += 1
            for name in names:
                times[name].append(spent[name])
    finally:
        if gc_was_enabled:
            gc.enable()
    reports = []
    for name in names:
        wall = statistics.median(times[name])
        reports.append(ThroughputReport(name, len(paths) / wall, len(paths), wall, repetitions, 1,
                                        built[name].params, tuple(times[name])))
    return reports


# -- stress test -------------------------------------------------------------


@dataclass(frozen=True)
class StressResult:
    detector: str
    params: DetectorParams
    accuracy: dict[tuple[int, int], float]  # (n, m) -> detection rate over stressed files
    files: int

    def crossing_fraction(self, level: float = 0.9) -> Optional[float]:
        """Smallest injected fraction n/m whose accuracy drops below ``level``."""
        below = [n / m for (n, m), acc in self.accuracy.items() if acc < level]
        return min(below) if below else None

    def grid_rows(self) -> list[tuple]:
        return [(self.detector, n, m, n / m, acc) for (n, m), acc in sorted(self.accuracy.items())]


STRESS_COLUMNS = ("detector", "injection_length", "jump_length", "size_increase", "accuracy")


def stress_eval(
    manifest: Manifest,
    detectors: Mapping[str, DetectorParams],
    injections: Sequence[int] = STRESS_INJECTION_GRID,
    jumps: Sequence[int] = STRESS_JUMP_GRID,
    seed: int = 0,
) -> dict[str, StressResult]:
    """Detection rate of each detector over stressed copies of the encrypted files.

    Every file gets one injected byte per (file, seed), drawn from the file's
    manifest path, so all cells and detectors see the same stressed bytes.
    """
    entries = [e for e in manifest.entries if e.label is Label.ENCRYPTED]
    if not entries:
        raise EmptyCorpusError("stress evaluation needs encrypted files")
    for n in injections:
        for m in jumps:
            StressSpec(n, m)
    built = {name: Detector(params) for name, params in detectors.items()}
    hits = {name: {(n, m): 0 for n in injections for m in jumps} for name in built}
    for entry in entries:
        data = read_source(manifest.resolve(entry))
        byte_seed = entry_seed(seed, entry.path)
        baseline = None
        for n in injections:
            for m in jumps:
                if n == 0:
                    if baseline is None:
                        baseline = {name: det.classify(data, entry.path).encrypted
                                    for name, det in built.items()}
                    flags = baseline
                else:
                    stressed = np.frombuffer(stress_inject(data, StressSpec(n, m, byte_seed)), np.uint8)
                    flags = {name: det.classify(stressed, entry.path).encrypted
                             for name, det in built.items()}
                for name, flagged in flags.items():
                    hits[name][(n, m)] += int(flagged)
    return {
        name: StressResult(name, built[name].params,
                           {cell: count / len(entries) for cell, count in hits[name].items()},
                           len(entries))
        for name in built
    }
