"""Key and ciphertext files: an 8-byte header followed by the raw encoding.

Header layout: ``b"PQCLAB\\0"`` then one byte naming scheme and level. Bits
0-5 hold the level code, bit 6 marks the systematic McEliece variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

MAGIC = b"PQCLAB\0"
HEADER_BYTES = len(MAGIC) + 1
SYSTEMATIC_BIT = 0x40

LEVEL_CODES = {
    ("kyber", "512"): 0x01,
    ("kyber", "768"): 0x02,
    ("kyber", "1024"): 0x03,
    ("mceliece", "348864"): 0x11,
    ("mceliece", "460896"): 0x12,
    ("mceliece", "6688128"): 0x13,
    ("mceliece", "toy-16"): 0x1A,
    ("mceliece", "toy-32"): 0x1B,
    ("mceliece", "toy-64"): 0x1C,
}
_BY_CODE = {v: k for k, v in LEVEL_CODES.items()}


class FormatError(ValueError):
    """File is truncated, has a bad header or does not match the expected parameters."""


@dataclass(frozen=True)
class FileTag:
    scheme: str
    level: str
    variant: str | None = None  # McEliece only

    def to_byte(self) -> int:
        code = LEVEL_CODES[self.scheme, self.level]
        if self.variant == "systematic":
            code |= SYSTEMATIC_BIT
        return code

    @classmethod
    def from_byte(cls, b: int) -> FileTag:
        try:
            scheme, level = _BY_CODE[b & ~SYSTEMATIC_BIT]
        except KeyError:
            raise FormatError(f"unknown scheme/level byte {b:#04x}") from None
        if scheme == "kyber":
            if b & SYSTEMATIC_BIT:
                raise FormatError("variant bit set on a Kyber file")
            return cls(scheme, level)
        return cls(scheme, level, "systematic" if b & SYSTEMATIC_BIT else "textbook")


def encode(tag: FileTag, payload: bytes, raw: bool = False) -> bytes:
    return payload if raw else MAGIC + bytes([tag.to_byte()]) + payload


def decode(data: bytes) -> tuple[FileTag, bytes]:
    if len(data) < HEADER_BYTES or not data.startswith(MAGIC):
        raise FormatError("missing PQCLAB header (use --raw for headerless files)")
    return FileTag.from_byte(data[len(MAGIC)]), data[HEADER_BYTES:]


def write(path: str | Path, tag: FileTag, payload: bytes, raw: bool = False) -> int:
    blob = encode(tag, payload, raw)
    Path(path).write_bytes(blob)
    return len(blob)


def read(path: str | Path, raw_tag: FileTag | None = None) -> tuple[FileTag, bytes]:
    """Read a file; with ``raw_tag`` the file is headerless and tagged by the caller."""
    data = Path(path).read_bytes()
    if raw_tag is not None:
        return raw_tag, data
    return decode(data)
