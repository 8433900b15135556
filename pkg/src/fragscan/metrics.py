"""Confusion-matrix metrics with "encrypted" as the positive class."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Tuple, Union

from .corpus import CorpusEntry, Label, Manifest
from .detector import Fallback, Verdict


def _ratio(num: int, den: int) -> Tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


@dataclass(frozen=True)
class MetricsReport:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    skipped: int = 0

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int, skipped: int = 0) -> "MetricsReport":
        return cls(tp, fp, tn, fn, skipped)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn + self.skipped

    @property
    def scored(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return _ratio(self.tp + self.tn, self.scored)[0]

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)[0]

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)[0]

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def degenerate(self) -> Tuple[str, ...]:
        """Names of metrics whose denominator vanished (reported as 0)."""
        flags = []
        if not self.scored:
            flags.append("accuracy")
        if not self.tp + self.fp:
            flags.append("precision")
        if not self.tp + self.fn:
            flags.append("recall")
        if not self.precision + self.recall:
            flags.append("f1")
        return tuple(flags)

    def __add__(self, other: "MetricsReport") -> "MetricsReport":
        return MetricsReport(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
            self.skipped + other.skipped,
        )

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(
            accuracy=self.accuracy,
            precision=self.precision,
            recall=self.recall,
            f1=self.f1,
            degenerate=list(self.degenerate),
        )
        return d


LabelLike = Union[Label, str, bool]


def _is_encrypted(label: LabelLike) -> bool:
    if isinstance(label, bool):
        return label
    return Label(label) is Label.ENCRYPTED


def score(verdicts: Iterable[Tuple[Verdict, LabelLike]]) -> MetricsReport:
    """Tally verdicts against ground truth; too-small files are counted as skipped."""
    tp = fp = tn = fn = skipped = 0
    for verdict, label in verdicts:
        if verdict.fallback is Fallback.TOO_SMALL:
            skipped += 1
            continue
        truth = _is_encrypted(label)
        if verdict.encrypted:
            if truth:
                tp += 1
            else:
                fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return MetricsReport(tp, fp, tn, fn, skipped)


def per_type_breakdown(
    verdicts: Mapping[str, Verdict] | Iterable[Tuple[CorpusEntry, Verdict]],
    manifest: Manifest | None = None,
) -> dict[str, MetricsReport]:
    """Group scores by type_tag.

    Accepts either (entry, verdict) pairs or a path -> verdict mapping plus
    the manifest it was produced from. Groups with no entries are omitted.
    """
    if isinstance(verdicts, Mapping):
        if manifest is None:
            raise TypeError("a manifest is required when verdicts are keyed by path")
        pairs = [(e, verdicts[e.path]) for e in manifest.entries if e.path in verdicts]
    else:
        pairs = list(verdicts)
    groups: dict[str, list] = defaultdict(list)
    for entry, verdict in pairs:
        groups[entry.type_tag].append((verdict, entry.label))
    return {tag: score(items) for tag, items in sorted(groups.items())}


def per_type_accuracy(
    verdicts: Mapping[str, Verdict] | Iterable[Tuple[CorpusEntry, Verdict]],
    manifest: Manifest | None = None,
) -> dict[str, float]:
    """Accuracy per type_tag; see per_type_breakdown for the accepted inputs."""
    return {tag: report.accuracy for tag, report in per_type_breakdown(verdicts, manifest).items()}
