"""On-disk formats: text key, parameter and group files, binary ciphertext files.

Text formats are line oriented, ``name: value`` per line after a magic
line. Integers are lowercase hex without leading zeros; bit sizes and
counts are decimal. Parsers are strict so that ``dump(load(x)) == x``
byte for byte.
"""
from __future__ import annotations

import os
import re
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .errors import AmounError, MalformedEnvelope
from .scheme import GroupContext, GroupEntry, KeyGenParams, PrivateKey, PublicKey

KEY_MAGIC = "AMOUN-KEY v1"
PARAMS_MAGIC = "AMOUN-PARAMS v1"
GROUP_MAGIC = "AMOUN-GRP v1"
CIPHERTEXT_MAGIC = b"AMN1"

PUBLIC_FIELDS = ("n", "e", "d")
PRIVATE_FIELDS = ("k", "v", "y")
PARAM_FIELDS = ("alpha_bits", "v_bits", "t_bits", "r_bits", "f_bits")
ENTRY_FIELDS = ("n", "e", "d", "n_prime", "ax", "budget_bits")

_HEX = re.compile(r"0|[1-9a-f][0-9a-f]*")
_DEC = re.compile(r"0|[1-9][0-9]*")


class FormatError(AmounError, ValueError):
    pass


def to_hex(value: int) -> str:
    if value < 0:
        raise ValueError("negative integers cannot be serialized")
    return format(value, "x")


def from_hex(text: str) -> int:
    if not _HEX.fullmatch(text):
        raise FormatError(f"non-canonical hex {text!r}")
    return int(text, 16)


def from_dec(text: str) -> int:
    if not _DEC.fullmatch(text):
        raise FormatError(f"non-canonical decimal {text!r}")
    return int(text)


def _lines(text: str, magic: str) -> list[tuple[str, str]]:
    if not text.endswith("\n"):
        raise FormatError("missing trailing newline")
    lines = text[:-1].split("\n")
    if lines[0] != magic:
        raise FormatError(f"expected magic {magic!r}, got {lines[0]!r}")
    pairs = []
    for line in lines[1:]:
        name, sep, value = line.partition(": ")
        if not sep or not name:
            raise FormatError(f"malformed line {line!r}")
        pairs.append((name, value))
    return pairs


def _expect(pairs, names):
    got = [name for name, _ in pairs]
    if got != list(names):
        unknown = set(got) - set(names)
        if unknown:
            raise FormatError(f"unknown fields: {sorted(unknown)}")
        raise FormatError(f"expected fields {list(names)}, got {got}")
    return [value for _, value in pairs]


# -- keys -------------------------------------------------------------------


@dataclass(frozen=True)
class KeyFile:
    key: PublicKey | PrivateKey
    alpha_bits: int

    @property
    def kind(self) -> str:
        return "public" if isinstance(self.key, PublicKey) else "private"


def dump_key(key: PublicKey | PrivateKey, alpha_bits: int) -> str:
    if isinstance(key, PublicKey):
        kind, fields = "public", PUBLIC_FIELDS
    else:
        kind, fields = "private", PRIVATE_FIELDS
    lines = [KEY_MAGIC, f"kind: {kind}", f"alpha_bits: {alpha_bits}"]
    lines += [f"{name}: {to_hex(getattr(key, name))}" for name in fields]
    return "\n".join(lines) + "\n"


def load_key(text: str) -> KeyFile:
    pairs = _lines(text, KEY_MAGIC)
    if len(pairs) < 2 or pairs[0][0] != "kind" or pairs[1][0] != "alpha_bits":
        raise FormatError("key file must start with kind and alpha_bits")
    kind = pairs[0][1]
    alpha_bits = from_dec(pairs[1][1])
    if kind == "public":
        n, e, d = (from_hex(v) for v in _expect(pairs[2:], PUBLIC_FIELDS))
        return KeyFile(PublicKey(n, e, d), alpha_bits)
    if kind == "private":
        k, v, y = (from_hex(v) for v in _expect(pairs[2:], PRIVATE_FIELDS))
        return KeyFile(PrivateKey(k, v, y), alpha_bits)
    raise FormatError(f"unknown key kind {kind!r}")


# -- parameters -------------------------------------------------------------


def dump_params(params: KeyGenParams) -> str:
    lines = [PARAMS_MAGIC] + [f"{name}: {getattr(params, name)}" for name in PARAM_FIELDS]
    return "\n".join(lines) + "\n"


def load_params(text: str) -> KeyGenParams:
    """Read a parameter file, or fall back to scaled defaults from a key file."""
    if text.startswith(KEY_MAGIC + "\n"):
        return KeyGenParams.scaled(load_key(text).alpha_bits)
    values = _expect(_lines(text, PARAMS_MAGIC), PARAM_FIELDS)
    return KeyGenParams(*(from_dec(v) for v in values))


# -- group contexts ---------------------------------------------------------


def dump_group(ctx: GroupContext) -> str:
    """Serialize a sender context. The result contains secrets (N')."""
    lines = [
        GROUP_MAGIC,
        f"group_id: {ctx.group_id}",
        f"r_bits: {ctx.r_bits}",
        f"count: {len(ctx.entries)}",
        f"x: {to_hex(ctx.x_modulus)}",
    ]
    for i, entry in enumerate(ctx.entries):
        pk = entry.public_key
        lines += [
            f"n[{i}]: {to_hex(pk.n)}",
            f"e[{i}]: {to_hex(pk.e)}",
            f"d[{i}]: {to_hex(pk.d)}",
            f"n_prime[{i}]: {to_hex(entry.n_prime)}",
            f"ax[{i}]: {to_hex(entry.ax)}",
            f"budget_bits[{i}]: {entry.budget_bits}",
        ]
    return "\n".join(lines) + "\n"


def load_group(text: str) -> GroupContext:
    pairs = _lines(text, GROUP_MAGIC)
    head = _expect(pairs[:4], ("group_id", "r_bits", "count", "x"))
    group_id = head[0]
    if not re.fullmatch(r"[0-9a-f]*", group_id):
        raise FormatError("group_id must be lowercase hex")
    r_bits = from_dec(head[1])
    count = from_dec(head[2])
    x = from_hex(head[3])
    names = [f"{name}[{i}]" for i in range(count) for name in ENTRY_FIELDS]
    values = _expect(pairs[4:], names)
    entries = []
    for i in range(count):
        n, e, d, n_prime, ax = (from_hex(v) for v in values[6 * i : 6 * i + 5])
        budget = from_dec(values[6 * i + 5])
        entries.append(GroupEntry(PublicKey(n, e, d), n_prime, ax, budget))
    return GroupContext(tuple(entries), x, r_bits, group_id)


# -- ciphertexts ------------------------------------------------------------


@dataclass(frozen=True)
class CiphertextFile:
    group_id: str
    lengths: tuple[int, ...]
    blocks: tuple[int, ...]

    @property
    def recipient_count(self) -> int:
        return len(self.lengths)

    def chunk_size(self, index: int) -> int:
        """Plaintext bytes of recipient ``index`` carried by each block."""
        if not self.blocks:
            return 0
        return -(-self.lengths[index] // len(self.blocks))


def dump_ciphertext(ct: CiphertextFile) -> bytes:
    gid = ct.group_id.encode("utf-8")
    out = bytearray(CIPHERTEXT_MAGIC)
    out += struct.pack(">I", len(ct.lengths))
    out += struct.pack(">I", len(gid)) + gid
    for length in ct.lengths:
        out += struct.pack(">I", length)
    out += struct.pack(">I", len(ct.blocks))
    for c in ct.blocks:
        raw = c.to_bytes((c.bit_length() + 7) // 8, "big")
        out += struct.pack(">I", len(raw)) + raw
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MalformedEnvelope("ciphertext file is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]


def load_ciphertext(data: bytes) -> CiphertextFile:
    r = _Reader(data)
    if r.take(4) != CIPHERTEXT_MAGIC:
        raise MalformedEnvelope("bad magic")
    count = r.u32()
    try:
        group_id = r.take(r.u32()).decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedEnvelope("group id is not valid UTF-8") from None
    lengths = tuple(r.u32() for _ in range(count))
    blocks = []
    for _ in range(r.u32()):
        raw = r.take(r.u32())
        if raw[:1] == b"\x00":
            raise MalformedEnvelope("ciphertext block has leading zero bytes")
        blocks.append(int.from_bytes(raw, "big"))
    if r.pos != len(data):
        raise MalformedEnvelope("trailing bytes after last block")
    return CiphertextFile(group_id, lengths, tuple(blocks))


def atomic_write(path: str | os.PathLike, data: bytes | str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
