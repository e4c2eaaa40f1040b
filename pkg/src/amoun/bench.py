"""Timing harness comparing AMOUN with RSA and Multi-RSA.

Each cell is one (scheme, phase, group size, prime size). Keys are
generated once per prime size outside any timed region and the first
``n`` keys are used for a group of size ``n``. All schemes in a cell get
the same messages, sized to the AMOUN budget at that prime size.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from typing import Callable

from . import baselines
from .errors import AmounError, ConfigInvalid
from .numeric import RandomSource
from .scheme import KeyGenParams, decrypt_int, encrypt, generate_group_keys, group_init

log = logging.getLogger(__name__)

SCHEMES = ("amoun", "multirsa", "rsa")
PHASES = ("decrypt", "encrypt", "init")
CSV_COLUMNS = (
    "scheme",
    "phase",
    "group_size",
    "prime_bits",
    "mean_ns",
    "median_ns",
    "stddev_ns",
    "repetitions",
)


@dataclass(frozen=True)
class BenchConfig:
    schemes: tuple[str, ...] = SCHEMES
    phases: tuple[str, ...] = PHASES
    group_sizes: tuple[int, ...] = tuple(range(2, 11))
    amoun_prime_bits: tuple[int, ...] = (1024, 2048, 3072)
    baseline_prime_bits: int = 1024
    repetitions: int = 1000
    warmup_runs: int = 10
    rng_seed: int | None = None
    parallel: bool = False
    interleave: bool = False

    def __post_init__(self):
        for name in ("schemes", "phases", "group_sizes", "amoun_prime_bits"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        bad = set(self.schemes) - set(SCHEMES)
        if bad or not self.schemes:
            raise ConfigInvalid(f"unknown or empty schemes: {sorted(bad)}")
        bad = set(self.phases) - set(PHASES)
        if bad or not self.phases:
            raise ConfigInvalid(f"unknown or empty phases: {sorted(bad)}")
        if not self.group_sizes or min(self.group_sizes) < 2:
            raise ConfigInvalid("group sizes must be >= 2")
        if self.repetitions < 1:
            raise ConfigInvalid("repetitions must be >= 1")
        if self.warmup_runs < 0:
            raise ConfigInvalid("warmup_runs must be >= 0")
        if self.rng_seed is not None and not 0 <= self.rng_seed < 2**64:
            raise ConfigInvalid("rng_seed must fit in 64 bits")
        sizes = list(self.amoun_prime_bits) + [self.baseline_prime_bits]
        if "amoun" in self.schemes and not self.amoun_prime_bits:
            raise ConfigInvalid("amoun_prime_bits is empty")
        for bits in sizes:
            try:
                KeyGenParams.scaled(bits)
            except AmounError as exc:
                raise ConfigInvalid(f"prime size {bits} is unusable: {exc}") from None

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    def cells(self) -> list[tuple[str, str, int, int]]:
        out = []
        for scheme in self.schemes:
            bits_list = self.amoun_prime_bits if scheme == "amoun" else (self.baseline_prime_bits,)
            for phase in self.phases:
                if scheme == "rsa" and phase == "init":
                    continue
                for n in self.group_sizes:
                    for bits in bits_list:
                        out.append((scheme, phase, n, bits))
        return sorted(set(out))


@dataclass(frozen=True)
class BenchRow:
    scheme: str
    phase: str
    group_size: int
    prime_bits: int
    mean_ns: float
    median_ns: float
    stddev_ns: float
    repetitions: int

    @property
    def sort_key(self):
        return (self.scheme, self.phase, self.group_size, self.prime_bits)


@dataclass
class BenchReport:
    rows: list[BenchRow]
    environment: dict = field(default_factory=dict)
    fixture_digests: dict = field(default_factory=dict)

    def row(self, scheme: str, phase: str, group_size: int, prime_bits: int) -> BenchRow:
        for r in self.rows:
            if r.sort_key == (scheme, phase, group_size, prime_bits):
                return r
        raise KeyError((scheme, phase, group_size, prime_bits))


def derive_seed(seed: int, *labels) -> int:
    text = ":".join(str(x) for x in (seed, *labels))
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def _digest(*values) -> str:
    h = hashlib.sha256()
    for v in values:
        h.update(repr(v).encode())
    return h.hexdigest()[:16]


def _time(body: Callable[[], object], repetitions: int, warmup: int) -> list[int]:
    for _ in range(warmup):
        body()
    samples = []
    for _ in range(repetitions):
        start = time.perf_counter_ns()
        body()
        samples.append(time.perf_counter_ns() - start)
    return samples


class _Fixtures:
    """Lazily generated key pools and message vectors, all seed-derived."""

    def __init__(self, cfg: BenchConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.max_n = max(cfg.group_sizes)
        self._amoun = {}
        self._rsa = {}

    def amoun_keys(self, bits):
        if bits not in self._amoun:
            log.info("generating %d AMOUN keys at %d bits", self.max_n, bits)
            rng = RandomSource(derive_seed(self.seed, "amoun-keys", bits))
            self._amoun[bits] = generate_group_keys(self.max_n, KeyGenParams.scaled(bits), rng)
        return self._amoun[bits]

    def rsa_keys(self, bits):
        if bits not in self._rsa:
            log.info("generating %d RSA keys at %d bits", self.max_n, bits)
            rng = RandomSource(derive_seed(self.seed, "rsa-keys", bits))
            self._rsa[bits] = baselines.generate_rsa_keys(self.max_n, bits, rng)
        return self._rsa[bits]

    def messages(self, n, bits):
        budget = KeyGenParams.scaled(bits).budget_bits
        rng = RandomSource(derive_seed(self.seed, "messages", n, bits))
        top = 1 << (budget - 1)
        return [rng.random_bits(budget) | top for _ in range(n)]


def _cell_body(fx: _Fixtures, scheme: str, phase: str, n: int, bits: int):
    """Return (timed callable, fixture digest) for one cell."""
    cfg = fx.cfg
    messages = fx.messages(n, bits)
    rng = RandomSource(derive_seed(fx.seed, "coins", scheme, phase, n, bits))
    workers = n if cfg.parallel else None

    if scheme == "amoun":
        params = KeyGenParams.scaled(bits)
        keys = fx.amoun_keys(bits)[:n]
        pks = [pk for pk, _ in keys]
        sks = [sk for _, sk in keys]
        digest = _digest(keys, messages)
        if phase == "init":
            return (lambda: group_init(pks, params, rng)), digest
        ctx = group_init(pks, params, rng)
        if phase == "encrypt":
            return (lambda: encrypt(ctx, messages, rng, workers=workers)), digest
        c = encrypt(ctx, messages, rng).c
        return (lambda: [decrypt_int(sk, c) for sk in sks]), digest

    keys = fx.rsa_keys(bits)[:n]
    digest = _digest(keys, messages)
    if scheme == "multirsa":
        if phase == "init":
            return (lambda: baselines.multirsa_init(keys)), digest
        ctx = baselines.multirsa_init(keys)
        if phase == "encrypt":
            return (lambda: baselines.multirsa_encrypt(ctx, messages)), digest
        c = baselines.multirsa_encrypt(ctx, messages)
        return (lambda: [baselines.multirsa_decrypt(kp, c) for kp in keys]), digest

    if phase == "encrypt":
        return (lambda: baselines.rsa_concat_encrypt(keys, messages)), digest
    buf = baselines.rsa_concat_encrypt(keys, messages)
    return (lambda: [baselines.rsa_concat_decrypt(kp, buf, i) for i, kp in enumerate(keys)]), digest


def run_suite(cfg: BenchConfig) -> BenchReport:
    """Time every configured cell.

    Decryption cells time all ``n`` recipients decrypting; divide by the
    group size for a per-recipient figure. Encryption cells include coin
    generation.

    By default each cell runs all its repetitions before the next cell
    starts. With ``cfg.interleave`` the repetitions are taken round-robin
    across cells (still one at a time), so slow drift in machine load hits
    every cell alike and cross-cell ratios stay comparable.
    """
    seed = cfg.rng_seed if cfg.rng_seed is not None else RandomSource().random_bits(64)
    fx = _Fixtures(cfg, seed)
    cells = cfg.cells()
    bodies = {}
    digests = {}
    samples = {}
    for cell in cells:
        body, digest = _cell_body(fx, *cell)
        digests["/".join(map(str, cell))] = digest
        if cfg.interleave:
            bodies[cell] = body
            _time(body, 0, cfg.warmup_runs)
            samples[cell] = []
        else:
            samples[cell] = _time(body, cfg.repetitions, cfg.warmup_runs)
            log.info("%s %s n=%d bits=%d done", *cell)
    if cfg.interleave:
        for _ in range(cfg.repetitions):
            for cell in cells:
                samples[cell] += _time(bodies[cell], 1, 0)
    rows = [
        BenchRow(
            *cell,
            float(statistics.fmean(samples[cell])),
            float(statistics.median(samples[cell])),
            float(statistics.pstdev(samples[cell])),
            cfg.repetitions,
        )
        for cell in cells
    ]
    environment = {
        "processor": platform.processor() or platform.machine(),
        "python": platform.python_version(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
    }
    return BenchReport(sorted(rows, key=lambda r: r.sort_key), environment, digests)


def emit_report(report: BenchReport, fmt: str = "csv") -> bytes:
    rows = sorted(report.rows, key=lambda r: r.sort_key)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([getattr(r, c) for c in CSV_COLUMNS])
        return buf.getvalue().encode()
    if fmt in ("json", "json-lines", "jsonl"):
        return "".join(json.dumps(asdict(r)) + "\n" for r in rows).encode()
    if fmt in ("table", "human-table"):
        return _table(rows).encode()
    raise ValueError(f"unknown report format {fmt!r}")


def _table(rows: list[BenchRow]) -> str:
    header = ["scheme", "phase", "n", "bits", "mean (us)", "median (us)", "stddev (us)", "reps"]
    body = [
        [
            r.scheme,
            r.phase,
            str(r.group_size),
            str(r.prime_bits),
            f"{r.mean_ns / 1e3:.2f}",
            f"{r.median_ns / 1e3:.2f}",
            f"{r.stddev_ns / 1e3:.2f}",
            str(r.repetitions),
        ]
        for r in rows
    ]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = []
    for line in [header] + body:
        cells = [
            c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(line, widths))
        ]
        lines.append("  ".join(cells).rstrip())
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def parse_csv(data: bytes | str) -> list[BenchRow]:
    if isinstance(data, bytes):
        data = data.decode()
    reader = csv.DictReader(io.StringIO(data))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        BenchRow(
            rec["scheme"],
            rec["phase"],
            int(rec["group_size"]),
            int(rec["prime_bits"]),
            float(rec["mean_ns"]),
            float(rec["median_ns"]),
            float(rec["stddev_ns"]),
            int(rec["repetitions"]),
        )
        for rec in reader
    ]
