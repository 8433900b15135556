"""Labelled corpora: manifest format, directory ingestion, synthetic generation.

A manifest is a tab-separated text file, one record per line::

    # fragscan manifest v1
    # generator_seed: 7
    path	label	type_tag	attack_tag	size
    plain/txt/txt-0000.txt	plain	txt	none	10342
    encrypted/rand/rand-0001.bin.low-H	encrypted	rand	low_h	70211

Paths are POSIX paths relative to the manifest's directory. Generated and
forged files follow ``<root>/<label>/<type_tag>/<name>[.<attack-suffix>]``.
"""

from __future__ import annotations

import csv
import enum
import fnmatch
import hashlib
import io
import logging
import os
import struct
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyCorpusError, ParameterError
from .forge import (
    AttackKind,
    AttackSpec,
    StressSpec,
    apply_attack,
    parse_stress_tag,
    stress_inject,
    stress_tag,
)
from .reports import atomic_write_text

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"
MANIFEST_MAGIC = "# fragscan manifest v1"
FIELDS = ("path", "label", "type_tag", "attack_tag", "size")

MIN_SIZE = 4 * 1024
MAX_SIZE = 1024 * 1024


class Label(str, enum.Enum):
    PLAIN = "plain"
    ENCRYPTED = "encrypted"


_ATTACK_TAGS = {kind.value for kind in AttackKind}
_SUFFIX_TO_ATTACK = {kind.suffix: kind.value for kind in AttackKind}


def _valid_attack_tag(tag: str) -> bool:
    return tag == "none" or tag in _ATTACK_TAGS or parse_stress_tag(tag) is not None


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    label: Label
    type_tag: str
    attack_tag: str = "none"
    size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "label", Label(self.label))
        if not _valid_attack_tag(self.attack_tag):
            raise ParameterError(f"unknown attack tag {self.attack_tag!r}")
        if self.attack_tag in _ATTACK_TAGS and self.label is not Label.ENCRYPTED:
            raise ParameterError(f"{self.path}: header attacks only apply to encrypted files")
        for value in (self.path, self.type_tag, self.attack_tag):
            if not value or any(c in value for c in "\t\r\n"):
                raise ParameterError(f"field {value!r} is empty or contains a tab/newline")

    @property
    def encrypted(self) -> bool:
        return self.label is Label.ENCRYPTED


@dataclass(frozen=True)
class Manifest:
    entries: tuple[CorpusEntry, ...]
    generator_seed: Optional[int] = None
    root: Path = field(default=Path("."), compare=False)
    unmatched: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: e.path))
        paths = [e.path for e in entries]
        if len(set(paths)) != len(paths):
            raise ParameterError("manifest paths must be unique")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "root", Path(self.root))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resolve(self, entry: CorpusEntry) -> Path:
        return self.root / PurePosixPath(entry.path)

    def select(self, predicate: Callable[[CorpusEntry], bool]) -> "Manifest":
        return replace(self, entries=tuple(e for e in self.entries if predicate(e)), unmatched=())

    def merged(self, other: "Manifest") -> "Manifest":
        if Path(other.root).resolve() != Path(self.root).resolve():
            raise ParameterError("cannot merge manifests with different roots")
        return replace(self, entries=self.entries + other.entries, unmatched=())

    def verify(self) -> None:
        """Check that every entry exists with its recorded size."""
        for e in self.entries:
            actual = self.resolve(e).stat().st_size
            if actual != e.size:
                raise ParameterError(f"{e.path}: size {actual} != recorded {e.size}")


def serialize_manifest(manifest: Manifest) -> str:
    buf = io.StringIO()
    buf.write(MANIFEST_MAGIC + "\n")
    if manifest.generator_seed is not None:
        buf.write(f"# generator_seed: {manifest.generator_seed}\n")
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(FIELDS)
    for e in manifest.entries:
        writer.writerow((e.path, e.label.value, e.type_tag, e.attack_tag, e.size))
    return buf.getvalue()


def parse_manifest(text: str, root: os.PathLike | str = ".") -> Manifest:
    seed = None
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "generator_seed":
                seed = int(value)
            continue
        if line.strip():
            rows.append(line)
    reader = csv.reader(rows, delimiter="\t")
    header = next(reader, None)
    if header is None or tuple(header) != FIELDS:
        raise ParameterError(f"manifest header must be {FIELDS}, got {header}")
    entries = []
    for row in reader:
        if len(row) != len(FIELDS):
            raise ParameterError(f"malformed manifest row: {row}")
        path, label, type_tag, attack_tag, size = row
        entries.append(CorpusEntry(path, Label(label), type_tag, attack_tag, int(size)))
    return Manifest(tuple(entries), seed, Path(root))


def write_manifest(manifest: Manifest, path: os.PathLike | str | None = None) -> Path:
    path = Path(path) if path is not None else Path(manifest.root) / MANIFEST_NAME
    atomic_write_text(path, serialize_manifest(manifest))
    return path


def read_manifest(path: os.PathLike | str) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    return parse_manifest(path.read_text(encoding="utf-8"), path.parent)


# -- ingestion ---------------------------------------------------------------


@dataclass(frozen=True)
class LabelRule:
    """Files whose relative path or name matches ``pattern`` get this label and type."""

    pattern: str
    label: Label
    type_tag: str
    attack_tag: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "label", Label(self.label))

    def matches(self, relpath: str) -> bool:
        return fnmatch.fnmatchcase(relpath, self.pattern) or fnmatch.fnmatchcase(
            PurePosixPath(relpath).name, self.pattern
        )

    @classmethod
    def parse(cls, text: str) -> "LabelRule":
        """Parse ``PATTERN=LABEL:TYPE[:ATTACK]``, e.g. ``*.pdf=plain:pdf``."""
        pattern, sep, rhs = text.rpartition("=")
        parts = rhs.split(":")
        if not sep or not pattern or len(parts) not in (2, 3):
            raise ParameterError(f"rule must look like PATTERN=LABEL:TYPE[:ATTACK], got {text!r}")
        return cls(pattern, Label(parts[0]), parts[1], parts[2] if len(parts) == 3 else None)


def attack_tag_from_name(name: str) -> str:
    suffix = name.rsplit(".", 1)[-1] if "." in name else ""
    if suffix in _SUFFIX_TO_ATTACK:
        return _SUFFIX_TO_ATTACK[suffix]
    if suffix.startswith("stress-"):
        try:
            n, m = (int(x) for x in suffix[len("stress-") :].split("-"))
        except ValueError:
            return "none"
        return stress_tag(n, m)
    return "none"


def ingest(root: os.PathLike | str, rules: Sequence[LabelRule]) -> Manifest:
    """Walk ``root`` and label every regular file matched by the first applicable rule.

    Unmatched files are logged and listed in ``Manifest.unmatched``.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"corpus root {root} is not a readable directory")
    entries, unmatched = [], []
    for dirpath, dirnames, filenames in os.walk(root, onerror=_raise):
        dirnames.sort()
        for name in sorted(filenames):
            full = Path(dirpath) / name
            if not full.is_file() or full.is_symlink():
                continue
            rel = full.relative_to(root).as_posix()
            if rel == MANIFEST_NAME:
                continue
            rule = next((r for r in rules if r.matches(rel)), None)
            if rule is None:
                unmatched.append(rel)
                continue
            tag = rule.attack_tag or attack_tag_from_name(name)
            entries.append(CorpusEntry(rel, rule.label, rule.type_tag, tag, full.stat().st_size))
    for rel in unmatched:
        log.warning("no labelling rule matches %s", rel)
    if not entries:
        raise EmptyCorpusError(f"no files under {root} matched any labelling rule")
    return Manifest(tuple(entries), None, root, tuple(unmatched))


def _raise(err: OSError) -> None:
    raise err


# -- synthetic generation ----------------------------------------------------

_WORDS = (
    "the of and to in is for on that with as by this from are be at or an it was we our "
    "report data file system value table figure result section page number total year "
    "customer account invoice order payment service project team meeting summary review "
    "analysis budget quarter revenue cost increase decrease market product user access "
    "network server storage backup policy security update version release change request "
    "approved pending completed draft final note please see attached following below above "
    "first second third new old high low good best more less each all some many other such "
    "will can may should must would could has have had not no yes between within during "
    "after before about into over under local remote office north south east west central"
).split()
_WORD_ARRAY = np.array([w.encode() for w in _WORDS], dtype=object)


def _text(rng: np.random.Generator, size: int) -> bytes:
    """Templated prose: numbered sections of sentences built from a fixed vocabulary."""
    out = bytearray()
    section = 1
    while len(out) < size:
        out += b"Section %d.%d - " % (section, int(rng.integers(1, 9)))
        out += b" ".join(_WORD_ARRAY[rng.integers(0, len(_WORDS), 4)]).title() + b"\n\n"
        for _ in range(int(rng.integers(3, 7))):
            words = _WORD_ARRAY[rng.integers(0, len(_WORDS), int(rng.integers(8, 20)))]
            sentence = b" ".join(words)
            out += sentence[:1].upper() + sentence[1:]
            if rng.random() < 0.3:
                out += b" (%d.%02d)" % (rng.integers(0, 10000), rng.integers(0, 100))
            out += b". "
        out += b"\n\n"
        section += 1
    return bytes(out[:size])


def _compressed(rng: np.random.Generator, size: int) -> bytes:
    """Deflate output of size ``size`` (high entropy, like embedded streams)."""
    out = bytearray()
    while len(out) < size:
        chunk = rng.integers(0, 256, max(4096, (size - len(out)) // 2), dtype=np.uint8)
        # smooth the noise so deflate has something to do, as with image rows
        chunk = (np.cumsum(chunk.astype(np.int32) % 7 - 3) & 0xFF).astype(np.uint8)
        out += zlib.compress(chunk.tobytes() + _text(rng, len(chunk) // 2), 6)
    return bytes(out[:size])


def _gen_txt(rng, size):
    return _text(rng, size)


_XML_ROOTS = (b"records", b"catalog", b"feed", b"inventory", b"ledger", b"dataset")


def _xml_prolog(rng) -> tuple[bytes, bytes]:
    """Declaration, optional comment or stylesheet, and an opening root element."""
    encoding = (b"UTF-8", b"utf-8", b"ISO-8859-1", b"windows-1252")[rng.integers(4)]
    out = bytearray(b'<?xml version="1.%d" encoding="%s"' % (rng.integers(0, 2), encoding))
    out += (b"", b' standalone="yes"', b' standalone="no"')[rng.integers(3)] + b"?>\n"
    extra = int(rng.integers(3))
    if extra == 1:
        out += b"<!-- exported %d-%02d-%02d by %s -->\n" % (
            rng.integers(2015, 2025), rng.integers(1, 13), rng.integers(1, 29),
            _WORD_ARRAY[rng.integers(0, len(_WORDS))])
    elif extra == 2:
        out += b'<?xml-stylesheet type="text/xsl" href="%s.xsl"?>\n' % _WORD_ARRAY[rng.integers(0, len(_WORDS))]
    root = _XML_ROOTS[rng.integers(len(_XML_ROOTS))]
    out += b'<%s xmlns="urn:%s:%d" count="%d">\n' % (
        root, _WORD_ARRAY[rng.integers(0, len(_WORDS))], rng.integers(1, 10), rng.integers(1, 100000))
    return bytes(out), root


def _gen_xml(rng, size):
    out, root = _xml_prolog(rng)
    out = bytearray(out)
    close = b"</%s>\n" % root
    i = 0
    while len(out) < size:
        words = b" ".join(_WORD_ARRAY[rng.integers(0, len(_WORDS), int(rng.integers(3, 9)))])
        out += b'  <record id="%d" status="%s">\n    <name>%s</name>\n    <amount>%d.%02d</amount>\n  </record>\n' % (
            i,
            _WORD_ARRAY[rng.integers(0, len(_WORDS))],
            words,
            rng.integers(0, 5000),
            rng.integers(0, 100),
        )
        i += 1
    return bytes(out[: size - len(close)]) + close


def _gen_bin(rng, size):
    """Structured binary: magic, fixed header, then fixed-width little-endian records."""
    header = b"SDB\x01" + struct.pack("<HHI", 1, 32, size // 32) + bytes(20)
    n = (size - len(header)) // 32 + 1
    ids = np.arange(n, dtype="<u4")
    rec = np.zeros(n, dtype=[("id", "<u4"), ("kind", "<u2"), ("flags", "<u2"), ("value", "<f4"),
                             ("ts", "<u4"), ("pad", "V16")])
    rec["id"] = ids
    rec["kind"] = rng.integers(0, 6, n)
    rec["flags"] = rng.choice([0, 1, 0x100], n)
    rec["value"] = rng.choice(np.array([0.0, 0.5, 1.0, 2.5, 10.0], dtype="<f4"), n)
    rec["ts"] = 1_600_000_000 + ids * 60
    return (header + rec.tobytes())[:size]


def _pdf_prolog(rng, size: int) -> bytes:
    """Version line, optional binary marker comment, then a linearization or catalog object."""
    out = bytearray(b"%%PDF-1.%d\n" % rng.integers(3, 8))
    if rng.random() < 0.7:
        out += b"%" + rng.integers(128, 256, 4, dtype=np.uint8).tobytes() + b"\n"
    if rng.random() < 0.4:
        out += b"%d 0 obj\n<< /Linearized 1 /L %d /H [ %d %d ] /O %d /E %d /N %d /T %d >>\nendobj\n" % (
            rng.integers(1, 200), size, rng.integers(500, 2000), rng.integers(100, 400),
            rng.integers(1, 200), rng.integers(1000, size), rng.integers(1, 500), rng.integers(1000, size))
    else:
        lang = (b"en-US", b"de-DE", b"fr-FR", b"en-GB")[rng.integers(4)]
        out += b"1 0 obj\n<< /Type /Catalog /Pages 2 0 R /Lang (%s) >>\nendobj\n" % lang
        out += b"2 0 obj\n<< /Type /Pages /Kids [3 0 R] /Count %d >>\nendobj\n" % rng.integers(1, 400)
    return bytes(out)


def _gen_pdf(rng, size):
    """Object dictionaries interleaved with flate-compressed streams."""
    out = bytearray(_pdf_prolog(rng, size))
    obj = 3
    while len(out) < size:
        body = _compressed(rng, int(rng.integers(2048, 65536)))
        out += b"%d 0 obj\n<< /Filter /FlateDecode /Length %d >>\nstream\n" % (obj, len(body))
        out += body + b"\nendstream\nendobj\n"
        obj += 1
    return bytes(out[:size])


def _zip_entry(rng, name: bytes, body: bytes) -> bytes:
    crc = int(rng.integers(0, 2**32))
    head = struct.pack("<4sHHHHHIIIHH", b"PK\x03\x04", 20, 6, 8, 0, 0x21, crc,
                       len(body), len(body) * 4, len(name), 0)
    return head + name + body


def _gen_docx(rng, size):
    """Zip container: local headers with deflated members, central directory at the end."""
    names = [b"[Content_Types].xml", b"_rels/.rels", b"word/document.xml", b"word/styles.xml",
             b"word/media/image1.png", b"docProps/core.xml"]
    out = bytearray()
    central = bytearray()
    i = 0
    while len(out) < size - 512:
        name = names[i % len(names)] if i < len(names) else b"word/media/image%d.png" % i
        length = int(rng.integers(300, 1500)) if i < 2 else int(rng.integers(4096, 131072))
        entry = _zip_entry(rng, name, _compressed(rng, length))
        central += b"PK\x01\x02" + struct.pack("<HHHHHH", 20, 20, 6, 8, 0, 0x21) + bytes(16) + name
        out += entry
        i += 1
    out = out[: size - min(len(central), size // 4)]
    return bytes(out + central)[:size]


def _png_chunk(kind: bytes, payload: bytes) -> bytes:
    return struct.pack(">I", len(payload)) + kind + payload + struct.pack(">I", zlib.crc32(kind + payload))


def _gen_png(rng, size):
    w, h = int(rng.integers(64, 2048)), int(rng.integers(64, 2048))
    out = bytearray(b"\x89PNG\r\n\x1a\n")
    out += _png_chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0))
    out += _png_chunk(b"pHYs", struct.pack(">IIB", 2835, 2835, 1))
    while len(out) < size - 12:
        out += _png_chunk(b"IDAT", _compressed(rng, min(8192, size - len(out))))
    return bytes(out + _png_chunk(b"IEND", b""))[:size]


def _tar_header(rng, name: bytes, length: int) -> bytes:
    h = bytearray(512)
    h[0 : len(name)] = name
    h[100:108] = b"0000644\x00"
    h[108:116] = b"0001750\x00"
    h[116:124] = b"0001750\x00"
    h[124:136] = b"%011o\x00" % length
    h[136:148] = b"%011o\x00" % int(rng.integers(1_500_000_000, 1_700_000_000))
    h[148:156] = b"        "
    h[156] = ord("0")
    h[257:265] = b"ustar\x0000"
    h[265:269] = b"user"
    h[297:302] = b"staff"
    h[148:156] = b"%06o\x00 " % sum(h)
    return bytes(h)


def _gen_tar(rng, size):
    """ustar archive of text and compressed members."""
    out = bytearray()
    i = 0
    while len(out) < size:
        length = int(rng.integers(1024, 65536))
        if i % 2 == 0:
            name, body = b"docs/notes-%03d.txt" % i, _text(rng, length)
        else:
            name, body = b"docs/archive-%03d.gz" % i, _compressed(rng, length)
        out += _tar_header(rng, name, len(body)) + body + bytes(-len(body) % 512)
        i += 1
    return bytes(out[:size])


def _gen_rand(rng, size):
    return rng.integers(0, 256, size, dtype=np.uint8).tobytes()


def _gen_randpad4(rng, size):
    """Random payload with a 4-byte run of one marker byte at every 512-byte boundary."""
    data = rng.integers(0, 256, size, dtype=np.uint8)
    marker = int(rng.integers(0, 256))
    for start in range(0, size, 512):
        data[start : start + 4] = marker
    return data.tobytes()


PLAIN_GENERATORS: dict[str, tuple[str, Callable]] = {
    "txt": ("txt", _gen_txt),
    "xml": ("xml", _gen_xml),
    "bin": ("dat", _gen_bin),
    "pdf": ("pdf", _gen_pdf),
    "docx": ("docx", _gen_docx),
    "png": ("png", _gen_png),
    "tar": ("tar", _gen_tar),
}

ENCRYPTED_GENERATORS: dict[str, tuple[str, Callable]] = {
    "rand": ("bin", _gen_rand),
    "randpad-4": ("bin", _gen_randpad4),
}


def _log_uniform_size(rng: np.random.Generator, lo: int, hi: int) -> int:
    return int(round(np.exp(rng.uniform(np.log(lo), np.log(hi)))))


def _plan(counts: Mapping[str, int]) -> list[tuple[Label, str, int]]:
    """Expand class or type counts into (label, type_tag, index) triples."""
    plan = []
    for key, count in counts.items():
        if count < 0:
            raise ParameterError(f"negative count for {key}")
        if key in (Label.PLAIN.value, Label.ENCRYPTED.value):
            label = Label(key)
            types = list(PLAIN_GENERATORS if label is Label.PLAIN else ENCRYPTED_GENERATORS)
            per_type = {t: 0 for t in types}
            for i in range(count):
                t = types[i % len(types)]
                plan.append((label, t, per_type[t]))
                per_type[t] += 1
        elif key in PLAIN_GENERATORS:
            plan += [(Label.PLAIN, key, i) for i in range(count)]
        elif key in ENCRYPTED_GENERATORS:
            plan += [(Label.ENCRYPTED, key, i) for i in range(count)]
        else:
            raise ParameterError(
                f"unknown class or type {key!r}; types are {sorted(PLAIN_GENERATORS)} "
                f"and {sorted(ENCRYPTED_GENERATORS)}"
            )
    return plan


def generate_synthetic(
    root: os.PathLike | str,
    counts: Mapping[str, int],
    seed: int = 0,
    min_size: int = MIN_SIZE,
    max_size: int = MAX_SIZE,
    write: bool = True,
) -> Manifest:
    """Write a synthetic labelled corpus under ``root`` and return its manifest.

    ``counts`` maps a class ("plain", "encrypted") or a type tag to a file
    count; class counts are spread round-robin over that class's types.
    Sizes are log-uniform in [min_size, max_size]. Each file draws from its
    own generator keyed by (seed, label, type, index), so adding files never
    changes existing ones.
    """
    if not 256 <= min_size <= max_size:
        raise ParameterError(f"need 256 <= min_size <= max_size, got {min_size}, {max_size}")
    root = Path(root)
    entries = []
    for label, type_tag, index in _plan(counts):
        ext, gen = (PLAIN_GENERATORS if label is Label.PLAIN else ENCRYPTED_GENERATORS)[type_tag]
        rng = np.random.default_rng([seed, _tag_number(label.value), _tag_number(type_tag), index])
        size = _log_uniform_size(rng, min_size, max_size)
        data = gen(rng, size)
        rel = f"{label.value}/{type_tag}/{type_tag}-{index:04d}.{ext}"
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        entries.append(CorpusEntry(rel, label, type_tag, "none", len(data)))
    manifest = Manifest(tuple(entries), seed, root)
    if write:
        write_manifest(manifest)
    return manifest


def _tag_number(tag: str) -> int:
    return int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=4).digest(), "little")


def entry_seed(seed: int, path: str) -> int:
    """64-bit seed for a per-file transformation, keyed by the file's manifest path."""
    digest = hashlib.blake2b(path.encode(), key=seed.to_bytes(8, "little"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _write_derived(manifest: Manifest, entry: CorpusEntry, suffix: str, data: bytes,
                   attack_tag: str, out_root: Path) -> CorpusEntry:
    rel = f"{entry.label.value}/{entry.type_tag}/{PurePosixPath(entry.path).name}.{suffix}"
    path = out_root / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return CorpusEntry(rel, entry.label, entry.type_tag, attack_tag, len(data))


def forge_corpus(
    manifest: Manifest,
    attacks: Iterable[AttackSpec],
    out_root: os.PathLike | str | None = None,
) -> tuple[Manifest, list[tuple[str, str]]]:
    """Apply each attack to every unforged encrypted entry.

    Returns the manifest of forged files (rooted at ``out_root``) and a list
    of (path, error) for files that could not be forged.
    """
    out_root = Path(out_root) if out_root is not None else manifest.root
    attacks = list(attacks)
    entries, errors = [], []
    for entry in manifest.entries:
        if not entry.encrypted or entry.attack_tag != "none":
            continue
        try:
            data = manifest.resolve(entry).read_bytes()
            for spec in attacks:
                spec = replace(spec, seed=entry_seed(spec.seed, entry.path))
                forged = apply_attack(data, spec)
                entries.append(_write_derived(manifest, entry, spec.kind.suffix, forged,
                                              spec.kind.value, out_root))
        except (OSError, ParameterError) as exc:
            log.error("cannot forge %s: %s", entry.path, exc)
            errors.append((entry.path, str(exc)))
    return Manifest(tuple(entries), manifest.generator_seed, out_root), errors


def stress_corpus(
    manifest: Manifest,
    spec: StressSpec,
    out_root: os.PathLike | str | None = None,
) -> tuple[Manifest, list[tuple[str, str]]]:
    """Stress-inject every unforged entry; the injected byte is drawn per file."""
    out_root = Path(out_root) if out_root is not None else manifest.root
    entries, errors = [], []
    for entry in manifest.entries:
        if entry.attack_tag != "none":
            continue
        try:
            data = manifest.resolve(entry).read_bytes()
            stressed = stress_inject(data, replace(spec, seed=entry_seed(spec.seed, entry.path)))
            tag = stress_tag(spec.injection_length, spec.jump_length)
            entries.append(_write_derived(manifest, entry, spec.suffix, stressed, tag, out_root))
        except OSError as exc:
            log.error("cannot stress %s: %s", entry.path, exc)
            errors.append((entry.path, str(exc)))
    return Manifest(tuple(entries), manifest.generator_seed, out_root), errors


ALL_ATTACKS = tuple(AttackSpec(kind) for kind in AttackKind)


def build_attack_corpus(
    root: os.PathLike | str,
    plain: int = 200,
    encrypted: int = 90,
    seed: int = 0,
    min_size: int = MIN_SIZE,
    max_size: int = MAX_SIZE,
) -> Manifest:
    """Plain files plus encrypted files, each encrypted file also forged three ways.

    With the defaults this gives 200 plain and 360 encrypted files.
    """
    base = generate_synthetic(root, {"plain": plain, "encrypted": encrypted}, seed,
                              min_size, max_size, write=False)
    forged, errors = forge_corpus(base, [AttackSpec(k, seed) for k in AttackKind])
    if errors:
        raise ParameterError(f"forging failed for {len(errors)} files: {errors[:3]}")
    manifest = base.merged(forged)
    write_manifest(manifest)
    return manifest
