"""Operation tallies threaded explicitly through instrumented arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, fields


@dataclass
class OpCounters:
    """Scope-local operation tallies.

    Instrumented functions take an optional ``ops`` argument and bump these
    fields in place. ``ntt_transforms`` counts whole forward/inverse transforms;
    butterfly multiplications inside a transform are *not* added to
    ``zq_mults`` (one transform costs ``NTT_BUTTERFLY_MULTS`` multiplications).
    ``gf2_word_ops`` counts byte-word XOR/AND operations on packed GF(2) rows.
    """

    zq_mults: int = 0
    zq_adds: int = 0
    gf2m_mults: int = 0
    gf2_word_ops: int = 0
    ntt_transforms: int = 0

    def __add__(self, other: OpCounters) -> OpCounters:
        return OpCounters(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)})

    def merge(self, other: OpCounters) -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def is_zero(self) -> bool:
        return not any(self.as_dict().values())
