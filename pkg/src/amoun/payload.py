"""Splitting arbitrary-length payloads into budget-sized blocks.

Every block is one AMOUN ciphertext carrying block ``j`` of every
recipient's payload. With ``B`` blocks, recipient ``i`` gets
``ceil(len_i / B)`` bytes per block, zero-padded at the end. ``B`` is the
smallest count for which every recipient's chunk fits its budget, so a
recipient can recompute its chunk size from the header alone.
"""
from __future__ import annotations

from typing import Sequence

from .errors import LengthMismatch
from .formats import CiphertextFile
from .numeric import RandomSource
from .scheme import GroupContext, PrivateKey, decrypt_int, encrypt


def block_count(lengths: Sequence[int], budget_bytes: Sequence[int]) -> int:
    return max((-(-n // b) for n, b in zip(lengths, budget_bytes)), default=0)


def encrypt_payloads(ctx: GroupContext, payloads: Sequence[bytes], rng: RandomSource) -> CiphertextFile:
    if len(payloads) != len(ctx.entries):
        raise LengthMismatch(f"{len(payloads)} payloads for {len(ctx.entries)} recipients")
    lengths = [len(p) for p in payloads]
    budgets = [entry.budget_bits // 8 for entry in ctx.entries]
    count = block_count(lengths, budgets)
    chunks = [-(-n // count) if count else 0 for n in lengths]
    blocks = []
    for j in range(count):
        messages = [
            p[j * size : (j + 1) * size].ljust(size, b"\x00")
            for p, size in zip(payloads, chunks)
        ]
        blocks.append(encrypt(ctx, messages, rng).c)
    return CiphertextFile(ctx.group_id, tuple(lengths), tuple(blocks))


def decrypt_payload(sk: PrivateKey, ct: CiphertextFile, index: int) -> bytes:
    """Recover recipient ``index``'s payload.

    A wrong key or index yields arbitrary bytes of the declared length:
    each decrypted block is reduced to its low-order chunk bytes.
    """
    size = ct.chunk_size(index)
    mask = (1 << (8 * size)) - 1
    out = b"".join((decrypt_int(sk, c) & mask).to_bytes(size, "big") for c in ct.blocks)
    return out[: ct.lengths[index]]
