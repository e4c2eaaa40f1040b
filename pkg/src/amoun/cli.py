"""Command-line front end.

Exit codes: 0 success, 2 invalid arguments or parameters, 3 key generation
retry budget exhausted, 4 moduli not pairwise coprime, 5 plaintext count
does not match the group, 6 malformed ciphertext file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import formats
from .bench import BenchConfig, emit_report, run_suite
from .errors import (
    AmounError,
    InvalidParameters,
    LengthMismatch,
    MalformedEnvelope,
    ModuliNotCoprime,
    RetryBudgetExhausted,
)
from .numeric import RandomSource
from .payload import decrypt_payload, encrypt_payloads
from .scheme import KeyGenParams, PublicKey, group_init, key_generate, message_budget

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RETRY = 3
EXIT_COPRIME = 4
EXIT_COUNT = 5
EXIT_MALFORMED = 6


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _seed(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be decimal, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x for x in text.split(",") if x]


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from None


def _load_key(path, kind):
    try:
        kf = formats.load_key(_read_text(path))
    except formats.FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_USAGE) from None
    if kf.kind != kind:
        raise CliError(f"{path}: expected a {kind} key, found {kf.kind}", EXIT_USAGE)
    return kf


def cmd_keygen(args) -> int:
    try:
        params = KeyGenParams(args.alpha_bits, args.v_bits, args.t_bits, args.r_bits, args.f_bits)
    except InvalidParameters as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    rng = RandomSource(args.seed)
    try:
        pk, sk = key_generate(params, rng)
    except RetryBudgetExhausted as exc:
        raise CliError(str(exc), EXIT_RETRY) from None
    formats.atomic_write(args.out_public, formats.dump_key(pk, params.alpha_bits))
    formats.atomic_write(args.out_private, formats.dump_key(sk, params.alpha_bits))
    if args.out_params:
        formats.atomic_write(args.out_params, formats.dump_params(params))
    print(f"budget_bytes: {message_budget(pk, params) // 8}")
    return EXIT_OK


def cmd_group_init(args) -> int:
    if len(args.public) < 2:
        raise CliError("a group needs at least two --public keys", EXIT_USAGE)
    keys = [_load_key(path, "public") for path in args.public]
    try:
        if args.params_from:
            params = formats.load_params(_read_text(args.params_from))
        else:
            params = KeyGenParams.scaled(keys[0].alpha_bits)
    except (formats.FormatError, InvalidParameters) as exc:
        raise CliError(f"{args.params_from}: {exc}", EXIT_USAGE) from None
    try:
        ctx = group_init([kf.key for kf in keys], params, RandomSource(args.seed))
    except ModuliNotCoprime as exc:
        raise CliError(
            f"{args.public[exc.i]} and {args.public[exc.j]} share a factor; regenerate one key",
            EXIT_COPRIME,
        ) from None
    except InvalidParameters as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    formats.atomic_write(args.out, formats.dump_group(ctx))
    return EXIT_OK


def cmd_encrypt(args) -> int:
    try:
        ctx = formats.load_group(_read_text(args.group))
    except formats.FormatError as exc:
        raise CliError(f"{args.group}: {exc}", EXIT_USAGE) from None
    if len(args.inputs) != len(ctx.entries):
        raise CliError(
            f"{len(args.inputs)} input files for a group of {len(ctx.entries)}", EXIT_COUNT
        )
    try:
        payloads = [Path(p).read_bytes() for p in args.inputs]
    except OSError as exc:
        raise CliError(f"cannot read {exc.filename}: {exc.strerror}", EXIT_USAGE) from None
    try:
        ct = encrypt_payloads(ctx, payloads, RandomSource(args.seed))
    except LengthMismatch as exc:
        raise CliError(str(exc), EXIT_COUNT) from None
    formats.atomic_write(args.out, formats.dump_ciphertext(ct))
    return EXIT_OK


def cmd_decrypt(args) -> int:
    sk = _load_key(args.private, "private").key
    try:
        data = Path(args.inputs).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {args.inputs}: {exc.strerror}", EXIT_USAGE) from None
    try:
        ct = formats.load_ciphertext(data)
    except MalformedEnvelope as exc:
        raise CliError(f"{args.inputs}: {exc}", EXIT_MALFORMED) from None
    if not 0 <= args.index < ct.recipient_count:
        raise CliError(
            f"index {args.index} out of range for {ct.recipient_count} recipients", EXIT_USAGE
        )
    formats.atomic_write(args.out, decrypt_payload(sk, ct, args.index))
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        if args.config:
            data = json.loads(_read_text(args.config))
        else:
            data = {}
        overrides = {
            "schemes": args.schemes,
            "phases": args.phases,
            "group_sizes": args.group_sizes,
            "amoun_prime_bits": args.amoun_prime_bits,
            "baseline_prime_bits": args.baseline_prime_bits,
            "repetitions": args.repetitions,
            "warmup_runs": args.warmup_runs,
            "rng_seed": args.seed,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})
        if args.parallel:
            data["parallel"] = True
        if args.interleave:
            data["interleave"] = True
        cfg = BenchConfig.from_dict(data)
    except (json.JSONDecodeError, AttributeError) as exc:
        raise CliError(f"bad config: {exc}", EXIT_USAGE) from None
    except AmounError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    out = emit_report(run_suite(cfg), args.format)
    if args.out in (None, "-"):
        sys.stdout.buffer.write(out)
        sys.stdout.flush()
    else:
        formats.atomic_write(args.out, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="amoun",
        description="AMOUN multi-recipient encryption (research scheme, not for production use).",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a recipient key pair")
    p.add_argument("--alpha-bits", type=int, default=1024)
    p.add_argument("--v-bits", type=int, default=512)
    p.add_argument("--t-bits", type=int, default=128)
    p.add_argument("--r-bits", type=int, default=128)
    p.add_argument("--f-bits", type=int, default=128)
    p.add_argument("--out-public", required=True)
    p.add_argument("--out-private", required=True)
    p.add_argument("--out-params", help="also write the size parameters for group-init")
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("group-init", help="build a sender context from public keys")
    p.add_argument("--public", nargs="+", required=True)
    p.add_argument(
        "--params-from",
        help="parameter file, or a public key file (scaled defaults for its alpha_bits)",
    )
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_group_init)

    p = sub.add_parser("encrypt", help="encrypt one file per recipient")
    p.add_argument("--group", required=True)
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="recover one recipient's file")
    p.add_argument("--private", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--in", dest="inputs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("bench", help="time AMOUN against RSA and Multi-RSA")
    p.add_argument("--config", help="JSON file with BenchConfig fields")
    p.add_argument("--schemes", type=_str_list)
    p.add_argument("--phases", type=_str_list)
    p.add_argument("--group-sizes", type=_int_list)
    p.add_argument("--amoun-prime-bits", type=_int_list)
    p.add_argument("--baseline-prime-bits", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--warmup-runs", type=int)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--parallel", action="store_true")
    p.add_argument(
        "--interleave", action="store_true", help="take repetitions round-robin across cells"
    )
    p.add_argument("--format", choices=("csv", "json", "table"), default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"amoun: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
