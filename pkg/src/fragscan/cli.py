"""Command-line interface: scan, forge, stress-forge, sweep, bench, stress-eval, gen-corpus.

Settings resolve as command-line flags > FRAGSCAN_SEED (seed only) >
``--config`` JSON file > built-in defaults. Detector defaults are the
best attack-dataset parameters of each detector.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from . import __version__
from .corpus import (
    MANIFEST_NAME,
    LabelRule,
    Manifest,
    build_attack_corpus,
    forge_corpus,
    generate_synthetic,
    ingest,
    read_manifest,
    stress_corpus,
    write_manifest,
)
from .detector import PRESETS, Detector, DetectorParams, Verdict, preset
from .errors import FragscanError, ParameterError
from .experiments import (
    BENCH_COLUMNS,
    DEFAULT_DISTANCES,
    DEFAULT_LENGTHS,
    DEFAULT_THRESHOLDS,
    STRESS_COLUMNS,
    SWEEP_COLUMNS,
    bench,
    stress_eval,
    sweep,
)
from .forge import STRESS_INJECTION_GRID, STRESS_JUMP_GRID, AttackKind, AttackSpec, StressSpec
from .reports import delimited, write_json, write_json_lines, write_plot_data, write_table

log = logging.getLogger("fragscan")

ENV_SEED = "FRAGSCAN_SEED"
EXIT_CLEAN, EXIT_ENCRYPTED, EXIT_ERROR = 0, 1, 2

SCAN_COLUMNS = ("path", "encrypted", "selected_area", "length", "offsets", "fallback", "error")
SUMMARY_COLUMNS = ("detector", "length", "threshold", "distance", "accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class GlobalConfig:
    seed: int = 0
    detector: str = "2f"
    length: Optional[int] = None
    threshold: Optional[float] = None
    distance: Optional[float] = None
    fragments: Optional[int] = None
    workers: int = 1
    out_dir: str = "fragscan-out"
    verbosity: int = 0

    def params(self, kind: Optional[str] = None) -> DetectorParams:
        """Preset for ``kind`` (default: the configured detector) with overrides applied."""
        base = preset(kind or self.detector, self.seed)
        overrides = {
            name: value
            for name, value in (
                ("length", self.length),
                ("threshold", self.threshold),
                ("distance", self.distance),
                ("fragments", self.fragments if kind is None else None),
            )
            if value is not None
        }
        return replace(base, **overrides)

    def validate(self) -> None:
        if self.detector.lower() not in PRESETS:
            raise ParameterError(f"unknown detector {self.detector!r}; choose from {sorted(PRESETS)}")
        if self.workers < 1:
            raise ParameterError(f"workers must be >= 1, got {self.workers}")
        self.params()


_CONFIG_FIELDS = {f.name for f in fields(GlobalConfig)}


def load_config_file(path: os.PathLike | str) -> dict[str, Any]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ParameterError(f"config file {path} must hold a JSON object")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ParameterError(f"unknown config keys in {path}: {sorted(unknown)}")
    return data


def _parse_seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise ParameterError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def resolve_config(args: argparse.Namespace, environ: Optional[dict] = None) -> GlobalConfig:
    environ = os.environ if environ is None else environ
    values: dict[str, Any] = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    if environ.get(ENV_SEED):
        values["seed"] = _parse_seed(environ[ENV_SEED])
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if isinstance(values.get("seed"), str):
        values["seed"] = _parse_seed(values["seed"])
    config = GlobalConfig(**values)
    config.validate()
    return config


def parse_grid(text: str) -> list[float]:
    """Comma list and/or inclusive ranges START:STOP:STEP, e.g. "8:64:8,128"."""
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise ParameterError(f"range must be START:STOP:STEP, got {part!r}")
            start, stop, step = (float(b) for b in bits)
            if step <= 0:
                raise ParameterError(f"range step must be positive, got {part!r}")
            count = int(round((stop - start) / step)) + 1
            values += [start + i * step for i in range(count) if start + i * step <= stop + 1e-9]
        else:
            values.append(float(part))
    if not values:
        raise ParameterError(f"empty grid {text!r}")
    return [int(v) if float(v).is_integer() else v for v in values]


def _kinds(text: str) -> list[str]:
    kinds = [k.strip().lower() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in PRESETS:
            raise ParameterError(f"unknown detector {k!r}; choose from {sorted(PRESETS)}")
    return kinds


def _run_record(command: str, config: GlobalConfig, extra: dict) -> dict:
    """Report metadata; the timestamp lives in its own field so payloads stay comparable."""
    return {
        "command": command,
        "version": __version__,
        "config": asdict(config),
        "seeds": {"reference": config.seed, "fragments": config.seed},
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }


def _load_manifest(path: str, rules: Sequence[str] = ()) -> Manifest:
    if rules:
        return ingest(path, [LabelRule.parse(r) for r in rules])
    return read_manifest(path)


# -- scan ----------------------------------------------------------------------


def _scan_targets(paths: Sequence[str], manifest: Optional[str]) -> list[tuple[str, str]]:
    """(path to read, offset key) pairs; directories are walked in sorted order."""
    targets = []
    if manifest:
        m = read_manifest(manifest)
        targets += [(str(m.resolve(e)), e.path) for e in m.entries]
    for p in paths:
        if os.path.isdir(p):
            for dirpath, dirnames, filenames in os.walk(p):
                dirnames.sort()
                for name in sorted(filenames):
                    if name == MANIFEST_NAME:
                        continue
                    full = os.path.join(dirpath, name)
                    targets.append((full, full))
        else:
            targets.append((p, p))
    return targets


def _verdict_row(path: str, verdict: Optional[Verdict], error: str = "") -> tuple:
    if verdict is None:
        return (path, "", "", "", "", "", error)
    offsets = ",".join(str(o) for o in verdict.offsets)
    return (path, verdict.encrypted, verdict.selected_area, verdict.length, offsets,
            verdict.fallback.value, "")


def cmd_scan(args, config: GlobalConfig) -> int:
    if not args.paths and not args.manifest:
        raise _UsageError("scan needs at least one path or --manifest")
    detector = Detector(config.params())
    rows, any_encrypted, any_error = [], False, False
    for path, key in _scan_targets(args.paths, args.manifest):
        try:
            verdict = detector.classify(path, key)
        except OSError as exc:
            log.error("cannot scan %s: %s", path, exc)
            rows.append(_verdict_row(path, None, exc.strerror or str(exc)))
            any_error = True
            continue
        any_encrypted |= verdict.encrypted
        rows.append(_verdict_row(path, verdict))
    text = delimited(SCAN_COLUMNS, rows)
    sys.stdout.write(text)
    if args.report:
        report = Path(args.report)
        write_table(report, SCAN_COLUMNS, rows)
        write_json(report.with_suffix(".json"),
                   _run_record("scan", config, {"params": asdict(detector.params), "files": len(rows)}))
    if any_encrypted:
        return EXIT_ENCRYPTED
    return EXIT_ERROR if any_error else EXIT_CLEAN


# -- forging -------------------------------------------------------------------


def _finish_forge(manifest: Manifest, derived: Manifest, errors, out: Optional[str]) -> int:
    if out is None or Path(out).resolve() == Path(manifest.root).resolve():
        written = write_manifest(manifest.merged(derived))
    else:
        written = write_manifest(derived)
    print(f"wrote {len(derived)} files; manifest {written}")
    for path, err in errors:
        print(f"error\t{path}\t{err}", file=sys.stderr)
    return EXIT_ERROR if errors else EXIT_CLEAN


def cmd_forge(args, config: GlobalConfig) -> int:
    manifest = _load_manifest(args.input, args.rule)
    kinds = list(AttackKind) if "all" in args.attack else [AttackKind(a) for a in args.attack]
    derived, errors = forge_corpus(manifest, [AttackSpec(k, config.seed) for k in kinds], args.output)
    return _finish_forge(manifest, derived, errors, args.output)


def cmd_stress_forge(args, config: GlobalConfig) -> int:
    manifest = _load_manifest(args.input, args.rule)
    spec = StressSpec(args.injection, args.jump, config.seed)
    derived, errors = stress_corpus(manifest, spec, args.output)
    return _finish_forge(manifest, derived, errors, args.output)


# -- experiments ---------------------------------------------------------------


def _summary(rows: Iterable[tuple]) -> str:
    return delimited(SUMMARY_COLUMNS, rows)


def cmd_sweep(args, config: GlobalConfig) -> int:
    manifest = read_manifest(args.manifest)
    kind = config.detector.lower()
    if kind == "daa-attack":
        kind = "daa"
    result = sweep(manifest, kind, args.lengths, args.thresholds, args.distances,
                   config.seed, config.workers)
    out = Path(config.out_dir)
    name = f"sweep-{kind}"
    write_table(out / f"{name}.tsv", SWEEP_COLUMNS, (p.row() for p in result.points))
    write_json_lines(out / f"{name}.jsonl",
                     ({"params": asdict(p.params), "metrics": p.metrics.as_dict()} for p in result.points))
    # best accuracy per subfragment length
    best_by_length: dict[int, float] = {}
    for p in result.points:
        best_by_length[p.params.length] = max(best_by_length.get(p.params.length, 0.0), p.metrics.accuracy)
    write_plot_data(out / f"{name}-plot.tsv", ((o, a, kind) for o, a in sorted(best_by_length.items())))
    best_rows = [p.row()[:8] for p in result.best]
    write_json(out / f"{name}.json", _run_record("sweep", config, {
        "manifest": str(args.manifest),
        "grids": {"lengths": list(args.lengths), "thresholds": list(args.thresholds),
                  "distances": list(args.distances) if kind != "daa" else [0]},
        "best": [dict(zip(SUMMARY_COLUMNS, r)) for r in best_rows],
    }))
    sys.stdout.write(_summary(best_rows))
    return EXIT_CLEAN


def cmd_bench(args, config: GlobalConfig) -> int:
    manifest = read_manifest(args.manifest)
    detectors = {}
    for kind in args.detectors:
        params = config.params(kind)
        detectors[params.name] = params
    reports = bench(manifest, detectors, args.repetitions)
    out = Path(config.out_dir)
    write_table(out / "bench.tsv", BENCH_COLUMNS, (r.row() for r in reports))
    write_json_lines(out / "bench.jsonl", (
        {"detector": r.detector, "files_per_second": r.files_per_second, "corpus_size": r.corpus_size,
         "wall_time_s": r.wall_time, "repetitions": r.repetitions, "workers": r.workers,
         "params": asdict(r.params), "times_s": list(r.times)} for r in reports))
    write_json(out / "bench.json", _run_record("bench", config, {
        "manifest": str(args.manifest), "detectors": args.detectors, "cache": "warm (one untimed read pass)"}))
    sys.stdout.write(delimited(("detector", "files_per_second"), ((r.detector, round(r.files_per_second, 2))
                                                                  for r in reports)))
    return EXIT_CLEAN


def cmd_stress_eval(args, config: GlobalConfig) -> int:
    manifest = read_manifest(args.manifest)
    detectors = {}
    for kind in args.detectors:
        params = config.params(kind)
        detectors[params.name] = params
    results = stress_eval(manifest, detectors, args.injections, args.jumps, config.seed)
    out = Path(config.out_dir)
    rows = [row for r in results.values() for row in r.grid_rows()]
    write_table(out / "stress-grid.tsv", STRESS_COLUMNS, rows)
    write_json_lines(out / "stress-grid.jsonl", (dict(zip(STRESS_COLUMNS, row)) for row in rows))
    write_plot_data(out / "stress-plot.tsv", ((row[3], row[4], row[0]) for row in rows))
    crossings = {name: r.crossing_fraction(args.level) for name, r in results.items()}
    write_json(out / "stress-eval.json", _run_record("stress-eval", config, {
        "manifest": str(args.manifest), "level": args.level, "crossing_fraction": crossings,
        "files": {name: r.files for name, r in results.items()}}))
    lines = [(name, "" if c is None else c) for name, c in crossings.items()]
    sys.stdout.write(delimited(("detector", f"fraction_below_{args.level}"), lines))
    return EXIT_CLEAN


def cmd_gen_corpus(args, config: GlobalConfig) -> int:
    if args.count:
        counts = {}
        for item in args.count:
            tag, _, n = item.partition("=")
            if not n.isdigit():
                raise _UsageError(f"--count expects TYPE=N, got {item!r}")
            counts[tag] = int(n)
        manifest = generate_synthetic(args.output, counts, config.seed, args.min_size, args.max_size)
    elif args.attacks:
        manifest = build_attack_corpus(args.output, args.plain, args.encrypted, config.seed,
                                       args.min_size, args.max_size)
    else:
        manifest = generate_synthetic(args.output, {"plain": args.plain, "encrypted": args.encrypted},
                                      config.seed, args.min_size, args.max_size)
    print(f"wrote {len(manifest)} files; manifest {Path(args.output) / MANIFEST_NAME}")
    return EXIT_CLEAN


# -- parser --------------------------------------------------------------------


class _UsageError(Exception):
    pass


def _grid_arg(text: str) -> list:
    try:
        return parse_grid(text)
    except (ParameterError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _kinds_arg(text: str) -> list[str]:
    try:
        return _kinds(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="JSON file with GlobalConfig fields")
    g.add_argument("--seed", type=str, default=None, help=f"reference/offset seed (env {ENV_SEED})")
    g.add_argument("--detector", default=None, help=f"one of {', '.join(PRESETS)} (default 2f)")
    g.add_argument("--length", type=int, default=None, help="subfragment length o")
    g.add_argument("--threshold", type=float, default=None, help="area threshold t")
    g.add_argument("--distance", type=float, default=None, help="distance d")
    g.add_argument("--fragments", type=int, default=None, help="fragment count N")
    g.add_argument("--workers", type=int, default=None)
    g.add_argument("--out-dir", dest="out_dir", default=None, help="report directory")
    g.add_argument("-v", "--verbose", dest="verbosity", action="count", default=None)

    parser = argparse.ArgumentParser(prog="fragscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fragscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", parents=[common], help="classify files")
    p.add_argument("paths", nargs="*", help="files or directories")
    p.add_argument("--manifest", help="scan the entries of a manifest")
    p.add_argument("--report", help="also write the verdict table (and a .json run record) here")
    p.set_defaults(func=cmd_scan)

    rule_help = "label an unmanifested directory: PATTERN=LABEL:TYPE[:ATTACK] (repeatable)"
    p = sub.add_parser("forge", parents=[common], help="apply header attacks to encrypted files")
    p.add_argument("input", help="corpus directory or manifest")
    p.add_argument("--attack", action="append", required=True,
                   choices=[k.value for k in AttackKind] + ["all"])
    p.add_argument("--output", help="output root (default: the input corpus)")
    p.add_argument("--rule", action="append", default=[], help=rule_help)
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("stress-forge", parents=[common], help="inject byte runs into files")
    p.add_argument("input", help="corpus directory or manifest")
    p.add_argument("--injection", "-n", type=int, required=True, help="injection length n")
    p.add_argument("--jump", "-m", type=int, required=True, help="jump length m")
    p.add_argument("--output", help="output root (default: the input corpus)")
    p.add_argument("--rule", action="append", default=[], help=rule_help)
    p.set_defaults(func=cmd_stress_forge)

    p = sub.add_parser("sweep", parents=[common], help="grid search over length/threshold/distance")
    p.add_argument("manifest")
    p.add_argument("--lengths", type=_grid_arg, default=list(DEFAULT_LENGTHS))
    p.add_argument("--thresholds", type=_grid_arg, default=list(DEFAULT_THRESHOLDS))
    p.add_argument("--distances", type=_grid_arg, default=list(DEFAULT_DISTANCES))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", parents=[common], help="files/second per detector")
    p.add_argument("manifest")
    p.add_argument("--detectors", type=_kinds_arg, default=["daa", "2f", "3f", "4f"])
    p.add_argument("--repetitions", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stress-eval", parents=[common], help="detection under stress injection")
    p.add_argument("manifest")
    p.add_argument("--detectors", type=_kinds_arg, default=["2f", "3f", "4f"])
    p.add_argument("--injections", type=_grid_arg, default=list(STRESS_INJECTION_GRID))
    p.add_argument("--jumps", type=_grid_arg, default=list(STRESS_JUMP_GRID))
    p.add_argument("--level", type=float, default=0.9, help="accuracy level for the crossing fraction")
    p.set_defaults(func=cmd_stress_eval)

    p = sub.add_parser("gen-corpus", parents=[common], help="write a synthetic labelled corpus")
    p.add_argument("output")
    p.add_argument("--plain", type=int, default=200)
    p.add_argument("--encrypted", type=int, default=90)
    p.add_argument("--attacks", action="store_true",
                   help="also forge every encrypted file with low_h, rep_bytes and com_seq")
    p.add_argument("--count", action="append", help="TYPE=N instead of class counts (repeatable)")
    p.add_argument("--min-size", type=int, default=4096)
    p.add_argument("--max-size", type=int, default=1024 * 1024)
    p.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except (ParameterError, OSError, ValueError, TypeError) as exc:
        print(f"fragscan: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(level=logging.WARNING - 10 * min(config.verbosity, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, config)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fragscan {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (FragscanError, OSError, ValueError) as exc:
        print(f"fragscan {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
