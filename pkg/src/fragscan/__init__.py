"""Entropy-based detection of ransomware-encrypted files.

Header-only differential area analysis (DAA), the header forgeries that
defeat it, the multi-fragment countermeasures (2F/3F/4F) and an evaluation
harness for running the experiments on labelled corpora.
"""

from .corpus import (
    CorpusEntry,
    Label,
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
from .detector import (
    PRESETS,
    Detector,
    DetectorParams,
    Fallback,
    FragmentRNG,
    Verdict,
    classify_daa,
    classify_nf,
    cumulative_areas,
    fragment_offsets,
    fragment_rng,
    preset,
    select_area,
    select_mean_area,
)
from .entropy import (
    DifferentialArea,
    EntropyCurve,
    ReferenceFragment,
    byte_entropy,
    differential_area,
    entropy_curve,
    trapezoid_area,
)
from .errors import EmptyCorpusError, FragscanError, OutOfBoundsError, ParameterError
from .experiments import SweepPoint, SweepResult, ThroughputReport, bench, stress_eval, sweep
from .forge import (
    AttackKind,
    AttackSpec,
    StressSpec,
    apply_attack,
    forge_com_seq,
    forge_low_h,
    forge_rep_bytes,
    stress_inject,
)
from .metrics import MetricsReport, per_type_accuracy, per_type_breakdown, score

__version__ = "0.1.0"

__all__ = [
    "AttackKind", "AttackSpec", "CorpusEntry", "Detector", "DetectorParams", "DifferentialArea",
    "EmptyCorpusError", "EntropyCurve", "Fallback", "FragmentRNG", "FragscanError", "Label",
    "LabelRule", "Manifest", "MetricsReport", "OutOfBoundsError", "PRESETS", "ParameterError",
    "ReferenceFragment", "StressSpec", "SweepPoint", "SweepResult", "ThroughputReport",
    "Verdict", "apply_attack", "bench", "build_attack_corpus", "byte_entropy", "classify_daa",
    "classify_nf", "cumulative_areas", "differential_area", "entropy_curve", "forge_com_seq",
    "forge_corpus", "forge_low_h", "forge_rep_bytes", "fragment_offsets", "fragment_rng",
    "generate_synthetic", "ingest", "per_type_accuracy", "per_type_breakdown", "preset",
    "read_manifest", "score", "select_area", "select_mean_area", "stress_corpus",
    "stress_eval", "stress_inject", "sweep", "trapezoid_area", "write_manifest",
]
