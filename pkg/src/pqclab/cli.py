"""pqclab command line: keygen, encrypt, decrypt, analyze, bench, selftest.

Exit codes: 0 success, 2 usage, 3 cryptographic/decoding failure or malformed
input, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import costmodel, fileformat, kyber, mceliece, selftest
from .fileformat import FileTag, FormatError
from .gf2linalg import BitVector

EXIT_OK, EXIT_USAGE, EXIT_CRYPTO, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


class CryptoError(Exception):
    pass


def _parse_seed(text: str | None) -> bytes | None:
    text = text or os.environ.get("PQCLAB_SEED")
    if not text:
        return None
    try:
        seed = bytes.fromhex(text)
    except ValueError:
        raise UsageError("--seed must be hex") from None
    if len(seed) != 32:
        raise UsageError("--seed must be 32 bytes (64 hex digits)")
    return seed


def _derive(seed: bytes | None, label: str) -> bytes | None:
    return None if seed is None else hashlib.sha256(label.encode() + seed).digest()


def _tag_from_args(args) -> FileTag:
    if args.scheme is None or args.level is None:
        raise UsageError("--scheme and --level are required")
    if args.scheme == "kyber":
        try:
            level = kyber.get_params(args.level).level
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return FileTag("kyber", level)
    try:
        level = mceliece.get_params(args.level).name
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return FileTag("mceliece", level, args.variant)


def _read(path: str, raw_tag: FileTag | None) -> tuple[FileTag, bytes]:
    try:
        return fileformat.read(path, raw_tag)
    except FormatError as exc:
        raise CryptoError(f"{path}: {exc}") from None


def _raw_tag(args) -> FileTag | None:
    return _tag_from_args(args) if args.raw else None


# ---------------------------------------------------------------------------
# commands


def cmd_keygen(args) -> int:
    tag = _tag_from_args(args)
    seed = _parse_seed(args.seed)
    out = Path(args.out)
    if tag.scheme == "kyber":
        pk, sk = kyber.kyber_keygen(kyber.get_params(tag.level), seed)
    else:
        params = mceliece.get_params(tag.level)
        pk, sk = mceliece.mceliece_keygen(params, tag.variant, mceliece.rng_from_seed(seed), threads=args.threads)
    pk_raw, sk_raw = pk.to_bytes(), sk.to_bytes()
    fileformat.write(out.with_name(out.name + ".pk"), tag, pk_raw, args.raw)
    fileformat.write(out.with_name(out.name + ".sk"), tag, sk_raw, args.raw)
    print(f"pk: {len(pk_raw)} bytes")
    print(f"sk: {len(sk_raw)} bytes")
    return EXIT_OK


def _mceliece_msg(params: mceliece.McElieceParams, data: bytes) -> BitVector:
    if len(data) != params.msg_bytes:
        raise UsageError(f"McEliece-{params.name} messages are {params.k} bits in {params.msg_bytes} bytes, got {len(data)} bytes")
    try:
        return BitVector.from_bytes(params.k, data)
    except ValueError:
        raise UsageError("message has nonzero pad bits past bit k") from None


def cmd_encrypt(args) -> int:
    tag, pk_raw = _read(args.pk, _raw_tag(args))
    msg = Path(args.input).read_bytes()
    seed = _derive(_parse_seed(args.seed), "encrypt")
    try:
        if tag.scheme == "kyber":
            params = kyber.get_params(tag.level)
            if len(msg) != 32:
                raise UsageError(f"Kyber messages are exactly 32 bytes, got {len(msg)}")
            pk = kyber.KyberPublicKey.from_bytes(params, pk_raw)
            ct = kyber.kyber_encrypt(pk, msg, seed).to_bytes()
        else:
            params = mceliece.get_params(tag.level)
            m = _mceliece_msg(params, msg)
            pk = mceliece.McEliecePublicKey.from_bytes(params, tag.variant, pk_raw)
            ct = mceliece.mceliece_encrypt(pk, m, mceliece.rng_from_seed(seed)).to_bytes()
    except UsageError:
        raise
    except ValueError as exc:
        raise CryptoError(f"{args.pk}: {exc}") from None
    fileformat.write(args.out, tag, ct, args.raw)
    print(f"ct: {len(ct)} bytes")
    return EXIT_OK


def cmd_decrypt(args) -> int:
    raw_tag = _raw_tag(args)
    tag, sk_raw = _read(args.sk, raw_tag)
    ct_tag, ct_raw = _read(args.input, raw_tag)
    if ct_tag != tag:
        raise CryptoError(f"ciphertext is for {ct_tag.scheme}-{ct_tag.level}, key is {tag.scheme}-{tag.level}")
    try:
        if tag.scheme == "kyber":
            params = kyber.get_params(tag.level)
            sk = kyber.KyberSecretKey.from_bytes(params, sk_raw)
            msg = kyber.kyber_decrypt(sk, kyber.KyberCiphertext.from_bytes(params, ct_raw))
        else:
            params = mceliece.get_params(tag.level)
            sk = mceliece.McElieceSecretKey.from_bytes(params, sk_raw)
            msg = mceliece.mceliece_decrypt(sk, BitVector.from_bytes(params.n, ct_raw)).to_bytes()
    except mceliece.DecodingFailure as exc:
        raise CryptoError(f"decoding failed: {exc}") from None
    except (ValueError, ArithmeticError) as exc:  # malformed key material
        raise CryptoError(str(exc)) from None
    Path(args.out).write_bytes(msg)
    print(f"msg: {len(msg)} bytes")
    return EXIT_OK


def cmd_analyze(args) -> int:
    seed = _parse_seed(args.seed) or b"pqclab-report"
    levels = [str(kyber.get_params(lv).level) if lv in kyber.PARAMS else lv for lv in args.level or []]
    try:
        report = costmodel.build_report(
            args.scheme or None, levels or None, trials=args.trials, measured=args.measured, seed=seed, threads=args.threads
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.figure:
        text = report.figure_csv(args.figure)
    elif args.format == "json":
        text = report.to_json(include_wall=not args.no_wall)
    elif args.format == "md":
        text = report.to_markdown()
    else:
        text = report.to_csv(include_wall=not args.no_wall)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    result = {"parallel_gf2_mul": costmodel.bench_parallel_mul(args.dim, args.threads)}
    timings = []
    for lv in kyber.PARAMS.values():
        timings.append(_time_scheme("kyber", lv.level, args.trials))
    for name in args.mceliece or []:
        timings.append(_time_scheme("mceliece", name, args.trials, args.threads))
    result["schemes"] = timings
    print(json.dumps(result, indent=2))
    return EXIT_OK


def _time_scheme(scheme: str, level: str, trials: int, threads: int = 1) -> dict:
    best = {op: None for op in costmodel.OPERATIONS}

    def lap(op, start):
        elapsed = time.perf_counter_ns() - start
        best[op] = elapsed if best[op] is None else min(best[op], elapsed)

    for _ in range(trials):
        if scheme == "kyber":
            p = kyber.get_params(level)
            t0 = time.perf_counter_ns()
            pk, sk = kyber.kyber_keygen(p)
            lap("keygen", t0)
            t0 = time.perf_counter_ns()
            ct = kyber.kyber_encrypt(pk, bytes(32))
            lap("encrypt", t0)
            t0 = time.perf_counter_ns()
            kyber.kyber_decrypt(sk, ct)
            lap("decrypt", t0)
        else:
            p = mceliece.get_params(level)
            rng = mceliece.rng_from_seed(None)
            t0 = time.perf_counter_ns()
            pk, sk = mceliece.mceliece_keygen(p, mceliece.SYSTEMATIC, rng, threads=threads)
            lap("keygen", t0)
            msg = BitVector.random(p.k, rng)
            t0 = time.perf_counter_ns()
            y = mceliece.mceliece_encrypt(pk, msg, rng)
            lap("encrypt", t0)
            t0 = time.perf_counter_ns()
            mceliece.mceliece_decrypt(sk, y)
            lap("decrypt", t0)
    return {"scheme": scheme, "level": level, **{f"{op}_ns": v for op, v in best.items()}}


def cmd_selftest(args) -> int:
    failed = selftest.run(quick=args.quick)
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_scheme_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--scheme", choices=("kyber", "mceliece"), required=required)
    p.add_argument("--level", required=required, help="512/768/1024 or 348864/460896/6688128/toy-16/toy-32/toy-64")
    p.add_argument("--variant", choices=mceliece.VARIANTS, default=mceliece.SYSTEMATIC, help="McEliece public-key form")
    p.add_argument("--raw", action="store_true", help="headerless files (sizes equal the bare encodings)")
    p.add_argument("--seed", help="32-byte hex seed (falls back to $PQCLAB_SEED)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqclab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key pair")
    _add_scheme_args(p, required=True)
    p.add_argument("--out", default="key", help="output name; writes NAME.pk and NAME.sk")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a message file")
    _add_scheme_args(p, required=False)
    p.add_argument("--pk", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext file")
    _add_scheme_args(p, required=False)
    p.add_argument("--sk", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("analyze", help="emit the cost report or one figure's data")
    p.add_argument("--scheme", action="append", choices=("kyber", "mceliece"))
    p.add_argument("--level", action="append")
    p.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    p.add_argument("--figure", type=int, choices=(2, 3, 4))
    p.add_argument("--measured", action="store_true", help="run instrumented executions")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed")
    p.add_argument("--no-wall", action="store_true", help="blank the wall_ns column")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="time the schemes and the parallel GF(2) product")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--mceliece", action="append", help="also time this McEliece level")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="run toy-scale oracle checks")
    p.add_argument("--quick", action="store_true", help="skip full-size McEliece keygen")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pqclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CryptoError as exc:
        print(f"pqclab: error: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except OSError as exc:
        print(f"pqclab: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
