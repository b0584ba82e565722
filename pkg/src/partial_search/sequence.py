"""Interleavings of global and local Grover steps.

A sequence is stored as a step string over ``{"G", "L"}`` in application
order: ``"LLGL"`` applies a local step, another local step, a global step
and a final local step.  The run-length tuple form reads right to left::

    S(n,m;k1,...,kq) = ... G_m^k(q-2) G_n^k(q-1) G_m^kq

where the last entry ``kq`` is always a local run (it acts first) and the
entries alternate local/global going leftwards.  ``S(4,2;1,1,2)`` is
therefore ``"LLGL"`` and ``S(4,2;3,0)`` is ``"GGG"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import InvalidParameterError, SequenceSyntaxError

GLOBAL = "G"
LOCAL = "L"
_ALPHABET = frozenset((GLOBAL, LOCAL))


def steps_to_counts(steps: str) -> tuple[int, ...]:
    """Convert an application-order step string to run-length tuple form."""
    runs: list[int] = []
    current, count = LOCAL, 0
    for ch in steps:
        if ch == current:
            count += 1
        else:
            runs.append(count)
            current, count = ch, 1
    runs.append(count)
    return tuple(reversed(runs))


def counts_to_steps(counts: Sequence[int]) -> str:
    """Inverse of :func:`steps_to_counts`.

    Only the final entry may be zero; zeros anywhere else would make the
    tuple ambiguous and are rejected.
    """
    counts = tuple(counts)
    if not counts:
        raise InvalidParameterError("tuple form needs at least one entry")
    q = len(counts)
    parts = []
    for j, k in enumerate(counts):
        if k < 0:
            raise InvalidParameterError(f"negative run length {k} at entry {j + 1}")
        if k == 0 and j != q - 1:
            raise InvalidParameterError(
                f"zero run length allowed only in the last entry, got entry {j + 1}"
            )
        is_local = (q - 1 - j) % 2 == 0
        parts.append((LOCAL if is_local else GLOBAL) * k)
    return "".join(reversed(parts))


@dataclass(frozen=True)
class OperatorSequence:
    """A fixed interleaving of global (scope ``n``) and local (scope ``m``) steps."""

    n: int
    m: int
    steps: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.m <= self.n:
            raise InvalidParameterError(f"need 1 <= m <= n, got n={self.n}, m={self.m}")
        bad = set(self.steps) - _ALPHABET
        if bad:
            raise InvalidParameterError(f"unknown step tags {sorted(bad)}")

    @classmethod
    def from_counts(cls, n: int, m: int, counts: Iterable[int]) -> "OperatorSequence":
        return cls(n, m, counts_to_steps(tuple(counts)))

    @classmethod
    def parse(cls, text: str, n: Optional[int] = None, m: Optional[int] = None) -> "OperatorSequence":
        """Parse ``S(n,m;k1,...,kq)`` or a bare step string.

        A bare step string carries no sizes, so ``n`` and ``m`` must be given.
        For the tuple form, explicit ``n``/``m`` must agree with the text.
        """
        stripped = text.strip()
        if stripped.startswith("S"):
            tn, tm, counts = _parse_tuple_text(text)
            if n is not None and n != tn:
                raise InvalidParameterError(f"n={n} conflicts with sequence text n={tn}")
            if m is not None and m != tm:
                raise InvalidParameterError(f"m={m} conflicts with sequence text m={tm}")
            try:
                return cls.from_counts(tn, tm, counts)
            except InvalidParameterError as exc:
                raise SequenceSyntaxError(str(exc), text, text.index(";") + 1) from None
        offset = len(text) - len(text.lstrip())
        for i, ch in enumerate(stripped):
            if ch not in _ALPHABET:
                raise SequenceSyntaxError(f"unexpected character {ch!r}", text, offset + i)
        if n is None or m is None:
            raise InvalidParameterError("a bare step string needs explicit n and m")
        return cls(n, m, stripped)

    @property
    def counts(self) -> tuple[int, ...]:
        return steps_to_counts(self.steps)

    @property
    def tuple_form(self) -> str:
        return f"S({self.n},{self.m};{','.join(map(str, self.counts))})"

    @property
    def k_tot(self) -> int:
        """Oracle queries used; every step makes exactly one."""
        return len(self.steps)

    @property
    def n_local(self) -> int:
        return self.steps.count(LOCAL)

    def scopes(self) -> list[int]:
        """Diffusion scope (qubit count) of each step in application order."""
        return [self.n if s == GLOBAL else self.m for s in self.steps]

    def __len__(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        return self.tuple_form


def _parse_tuple_text(text: str) -> tuple[int, int, list[int]]:
    pos = 0
    length = len(text)

    def skip_ws():
        nonlocal pos
        while pos < length and text[pos].isspace():
            pos += 1

    def expect(ch: str):
        nonlocal pos
        skip_ws()
        if pos >= length or text[pos] != ch:
            found = repr(text[pos]) if pos < length else "end of input"
            raise SequenceSyntaxError(f"expected {ch!r}, found {found}", text, pos)
        pos += 1

    def integer() -> int:
        nonlocal pos
        skip_ws()
        start = pos
        while pos < length and text[pos].isdigit():
            pos += 1
        if start == pos:
            found = repr(text[pos]) if pos < length else "end of input"
            raise SequenceSyntaxError(f"expected integer, found {found}", text, start)
        return int(text[start:pos])

    expect("S")
    expect("(")
    n = integer()
    expect(",")
    m = integer()
    expect(";")
    counts = [integer()]
    while True:
        skip_ws()
        if pos < length and text[pos] == ",":
            pos += 1
            counts.append(integer())
        else:
            break
    expect(")")
    skip_ws()
    if pos != length:
        raise SequenceSyntaxError("trailing characters", text, pos)
    if not 1 <= m <= n:
        raise SequenceSyntaxError(f"need 1 <= m <= n, got n={n}, m={m}", text, text.index("(") + 1)
    return n, m, counts
