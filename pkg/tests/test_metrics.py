import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fragscan.corpus import CorpusEntry, Label, Manifest
from fragscan.detector import PRESETS, Fallback, Verdict
from fragscan.metrics import MetricsReport, per_type_accuracy, per_type_breakdown, score


def verdict(encrypted, fallback=Fallback.NONE):
    return Verdict(encrypted, 1.0, ((0, 1.0),), PRESETS["daa"], fallback, 48)


def exact(tp, fp, tn, fn):
    """Rational-arithmetic oracle with the 0/0 -> 0 convention."""
    def ratio(a, b):
        return Fraction(a, b) if b else Fraction(0)
    p, r = ratio(tp, tp + fp), ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return ratio(tp + tn, tp + fp + tn + fn), p, r, f1


def test_reference_confusion_matrix():
    m = MetricsReport(95, 1, 99, 5)
    assert m.accuracy == pytest.approx(0.97)
    assert m.precision == pytest.approx(95 / 96)
    assert m.recall == pytest.approx(0.95)
    assert m.f1 == pytest.approx(0.96939, abs=1e-5)
    assert m.degenerate == ()


def test_all_correct():
    m = score([(verdict(True), Label.ENCRYPTED), (verdict(False), "plain")])
    assert (m.accuracy, m.f1) == (1.0, 1.0)


def test_degenerate_precision():
    m = MetricsReport(0, 0, 10, 3)
    assert m.precision == 0.0 and "precision" in m.degenerate and "f1" in m.degenerate
    empty = MetricsReport()
    assert empty.accuracy == 0.0 and set(empty.degenerate) == {"accuracy", "precision", "recall", "f1"}


def test_too_small_is_skipped():
    m = score([(verdict(False, Fallback.TOO_SMALL), "encrypted"), (verdict(True), True)])
    assert (m.tp, m.fn, m.skipped, m.total) == (1, 0, 1, 2)


def test_identities_on_random_matrices():
    rnd = random.Random(0)
    for i in range(10_000):
        hi = rnd.choice([0, 1, 3, 100, 10**6])
        tp, fp, tn, fn = (rnd.randint(0, hi) for _ in range(4))
        m = MetricsReport(tp, fp, tn, fn, rnd.randint(0, 5))
        acc, p, r, f1 = exact(tp, fp, tn, fn)
        assert abs(m.accuracy - float(acc)) <= 1e-12
        assert abs(m.precision - float(p)) <= 1e-12
        assert abs(m.recall - float(r)) <= 1e-12
        assert abs(m.f1 - float(f1)) <= 1e-12
        assert m.total == tp + fp + tn + fn + m.skipped
        assert (m.f1 == 0) == (m.precision == 0 or m.recall == 0)
        for v in (m.accuracy, m.precision, m.recall, m.f1):
            assert 0.0 <= v <= 1.0


@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=60), st.randoms())
def test_score_is_permutation_invariant(pairs, rnd):
    items = [(verdict(v), t) for v, t in pairs]
    shuffled = items[:]
    rnd.shuffle(shuffled)
    assert score(items) == score(shuffled)


@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=60), st.integers(0, 60))
def test_partial_counts_merge(pairs, cut):
    items = [(verdict(v), t) for v, t in pairs]
    assert score(items[:cut]) + score(items[cut:]) == score(items)


def _typed(entries_spec):
    entries, verdicts = [], {}
    for i, (tag, label, flagged) in enumerate(entries_spec):
        e = CorpusEntry(f"f{i}", label, tag)
        entries.append(e)
        verdicts[e.path] = verdict(flagged)
    return Manifest(tuple(entries)), verdicts


def test_single_type_breakdown_equals_overall():
    m, v = _typed([("txt", "plain", False), ("txt", "plain", True), ("txt", "encrypted", True)])
    overall = score((v[e.path], e.label) for e in m)
    assert per_type_accuracy(v, m) == {"txt": overall.accuracy}


@given(st.lists(st.tuples(st.sampled_from(["a", "b", "c"]), st.sampled_from(["plain", "encrypted"]),
                          st.booleans()), min_size=1, max_size=50))
def test_weighted_breakdown_reconstructs_overall(spec):
    m, v = _typed(spec)
    groups = per_type_breakdown(v, m)
    overall = score((v[e.path], e.label) for e in m)
    weighted = sum(Fraction(g.tp + g.tn) for g in groups.values()) / sum(g.scored for g in groups.values())
    assert float(weighted) == overall.accuracy
    assert sum(groups.values(), MetricsReport()) == overall
    assert all(g.total > 0 for g in groups.values())


def test_breakdown_accepts_pairs_and_needs_manifest_for_mapping():
    m, v = _typed([("a", "plain", False), ("b", "encrypted", False)])
    pairs = [(e, v[e.path]) for e in m]
    assert per_type_breakdown(pairs) == per_type_breakdown(v, m)
    with pytest.raises(TypeError):
        per_type_breakdown(v)


def test_as_dict():
    d = MetricsReport(1, 0, 1, 0).as_dict()
    assert d["accuracy"] == 1.0 and d["degenerate"] == [] and d["tp"] == 1
