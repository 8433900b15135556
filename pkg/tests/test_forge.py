import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragscan.detector import PRESETS, Detector
from fragscan.entropy import byte_entropy, entropy_curve
from fragscan.errors import ParameterError
from fragscan.forge import (
    COM_SEQ_POOL,
    AttackKind,
    AttackSpec,
    StressSpec,
    apply_attack,
    com_seq_header,
    forge_com_seq,
    forge_low_h,
    forge_rep_bytes,
    parse_stress_tag,
    stress_inject,
    stress_tag,
)


def random_bytes(n, seed=0):
    return np.random.default_rng(seed).integers(0, 256, n, dtype=np.uint8).tobytes()


def test_low_h_prepends_constant_block():
    data = random_bytes(1000)
    out = forge_low_h(data)
    assert len(out) == 1256
    assert out[:256] == b"a" * 256 and out[256:] == data
    assert forge_low_h(b"") == b"a" * 256
    assert np.all(entropy_curve(out, 0, 256).values == 0.0)


def test_rep_bytes_tiles_first_block():
    head = bytes([0x10, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88])
    data = head + random_bytes(992)
    out = forge_rep_bytes(data)
    assert out[:256] == head * 32
    assert out[256:] == data[256:] and len(out) == len(data)
    assert byte_entropy(out, 0, 256) == 3.0


def test_rep_bytes_identical_head_gives_zero_entropy():
    out = forge_rep_bytes(b"\x07" * 8 + random_bytes(500))
    assert byte_entropy(out, 0, 256) == 0.0


def test_rep_bytes_short_input():
    out = forge_rep_bytes(b"abcdefgh" + b"z" * 50)
    assert out == b"abcdefgh" * 32
    with pytest.raises(ParameterError):
        forge_rep_bytes(b"short")


@settings(max_examples=100, deadline=None)
@given(st.binary(min_size=8, max_size=600))
def test_rep_bytes_curve_is_constant(data):
    # every 8-byte prefix step repeats the same histogram shape, so the curve is flat
    out = forge_rep_bytes(data)
    values = entropy_curve(out, 0, 256).values
    assert np.allclose(values, byte_entropy(data, 0, 8), atol=1e-12)


def test_com_seq_header_is_pool_derived():
    header = com_seq_header(5)
    assert len(header) == 256
    allowed = set(b"".join(COM_SEQ_POOL))
    assert set(header) <= allowed
    # both alphabets open the header, in seeded order
    alphabets = {COM_SEQ_POOL[0] + COM_SEQ_POOL[1], COM_SEQ_POOL[1] + COM_SEQ_POOL[0]}
    assert header[:52] in alphabets


def test_com_seq_deterministic_and_size_preserving():
    data = random_bytes(5000)
    assert forge_com_seq(data, 3) == forge_com_seq(data, 3)
    assert forge_com_seq(data, 3) != forge_com_seq(data, 4)
    out = forge_com_seq(data, 3)
    assert len(out) == len(data) and out[256:] == data[256:]
    with pytest.raises(ParameterError):
        forge_com_seq(bytes(255))


def test_com_seq_header_entropy_is_high_at_48():
    assert all(byte_entropy(com_seq_header(s), 0, 48) >= 2.0 for s in range(200))


def test_attacks_defeat_daa_on_random_file():
    data = random_bytes(8192, seed=9)
    daa = Detector(PRESETS["daa"])
    assert daa.classify(data).encrypted
    for kind in AttackKind:
        assert not daa.classify(apply_attack(data, AttackSpec(kind, 1))).encrypted


def test_com_seq_is_caught_at_length_48():
    daa48 = Detector(PRESETS["daa-attack"])
    hits = sum(daa48.classify(forge_com_seq(random_bytes(4096, s), s)).encrypted for s in range(50))
    assert hits >= 45


def test_attack_spec_accepts_strings():
    assert AttackSpec("low_h").kind is AttackKind.LOW_H
    assert AttackKind.REP_BYTES.suffix == "rep-bytes"
    with pytest.raises(ValueError):
        AttackSpec("nope")


@pytest.mark.parametrize("n,m,increase", [(2, 44, 2 / 44), (8, 40, 0.2), (12, 36, 1 / 3)])
def test_stress_size_arithmetic(n, m, increase):
    data = random_bytes(m * 100)
    out = stress_inject(data, StressSpec(n, m))
    assert len(out) == len(data) + n * (len(data) // m)
    assert (len(out) - len(data)) / len(data) == pytest.approx(increase)
    assert StressSpec(n, m).size_increase == pytest.approx(increase)


def test_stress_4400_byte_file():
    assert len(stress_inject(bytes(4400), StressSpec(2, 44))) == 4600


def test_stress_layout():
    data = bytes(range(10))
    out = stress_inject(data, StressSpec(2, 4, seed=1))
    r = out[4]
    assert out == data[:4] + bytes([r, r]) + data[4:8] + bytes([r, r]) + data[8:]


def test_stress_zero_is_identity():
    data = random_bytes(777)
    assert stress_inject(data, StressSpec(0, 12)) == data


@settings(max_examples=100, deadline=None)
@given(st.binary(max_size=700), st.integers(0, 32), st.integers(1, 16), st.integers(0, 1000))
def test_stress_removing_injection_restores_input(data, half_n, quarter_m, seed):
    n, m = 2 * half_n, 4 * quarter_m
    out = stress_inject(data, StressSpec(n, m, seed))
    assert len(out) == len(data) + n * (len(data) // m)
    kept = b"".join(out[i : i + m] for i in range(0, len(out), m + n))
    assert kept == data


@pytest.mark.parametrize("n,m", [(1, 4), (66, 4), (2, 2), (2, 6), (2, 68), (-2, 4)])
def test_stress_spec_bounds(n, m):
    with pytest.raises(ParameterError):
        StressSpec(n, m)


def test_stress_tags():
    assert stress_tag(2, 44) == "stress(2,44)"
    assert parse_stress_tag("stress(2,44)") == (2, 44)
    assert parse_stress_tag("low_h") is None
    assert StressSpec(8, 40).suffix == "stress-8-40"
