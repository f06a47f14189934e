"""Indices, compositions, pair compositions and the maps between them.

Text notation: ``(3,1)`` for an index or composition, ``()`` for the empty
one, ``((2,1),(1,2))`` for a pair composition.  The flat form ``(2,1,1,2)``
is also accepted wherever a pair composition is expected.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import DomainError, ParseError

__all__ = [
    "Index",
    "Composition",
    "PairComposition",
    "as_index",
    "as_composition",
    "as_pair_composition",
    "normalize",
    "precedes",
    "strictly_precedes",
    "kappa",
    "kappa_inv",
    "dual",
    "enumerate_compositions",
    "enumerate_pair_compositions",
    "enumerate_indices",
    "enumerate_admissible",
    "parse_index",
    "parse_pair_composition",
]


class _Parts:
    """Immutable tuple of positive integers with structural equality."""

    __slots__ = ()
    parts: tuple

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


@dataclass(frozen=True, repr=False)
class Index(_Parts):
    """MZV/MPL index ``(k_1, ..., k_n)``; may be empty."""

    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(k) for k in self.parts))
        if any(k < 1 for k in self.parts):
            raise DomainError(f"index entries must be positive: {self.parts}")

    @property
    def depth(self) -> int:
        return len(self.parts)

    @property
    def admissible(self) -> bool:
        return not self.parts or self.parts[0] >= 2

    def __repr__(self):
        return f"Index{self}"


@dataclass(frozen=True, repr=False)
class Composition(_Parts):
    """Ordered sequence of positive integers; ``()`` is the composition of 0."""

    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(int(c) for c in self.parts))
        if any(c < 1 for c in self.parts):
            raise DomainError(f"composition parts must be positive: {self.parts}")

    @property
    def length(self) -> int:
        return len(self.parts)

    def __repr__(self):
        return f"Composition{self}"


@dataclass(frozen=True, repr=False)
class PairComposition:
    """``((a_1, b_1), ..., (a_s, b_s))`` with all entries positive."""

    pairs: tuple = ()

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        if not pairs:
            raise DomainError("a pair composition needs at least one pair")
        if any(a < 1 or b < 1 for a, b in pairs):
            raise DomainError(f"pair composition entries must be positive: {pairs}")

    @classmethod
    def from_flat(cls, flat: Sequence[int]) -> "PairComposition":
        if len(flat) % 2:
            raise DomainError(f"flat pair composition has odd length: {tuple(flat)}")
        return cls(tuple(zip(flat[0::2], flat[1::2])))

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    @property
    def s(self) -> int:
        return len(self.pairs)

    @property
    def flat(self) -> tuple:
        return tuple(itertools.chain.from_iterable(self.pairs))

    @property
    def weight(self) -> int:
        return sum(a + b for a, b in self.pairs)

    @cached_property
    def prefix_sums(self) -> tuple:
        """``(B_0, B_1, ..., B_s)`` with ``B_i = b_1 + ... + b_i``."""
        return tuple(itertools.accumulate((b for _, b in self.pairs), initial=0))

    @property
    def chain_length(self) -> int:
        return self.prefix_sums[-1]

    def reversed_swapped(self) -> "PairComposition":
        """``((b_s, a_s), ..., (b_1, a_1))``."""
        return PairComposition(tuple((b, a) for a, b in reversed(self.pairs)))

    def __str__(self):
        return "(" + ",".join(f"({a},{b})" for a, b in self.pairs) + ")"

    def __repr__(self):
        return f"PairComposition{self}"

    def short(self) -> str:
        """Flat notation used in the identity table, e.g. ``2,1,1,2``."""
        return ",".join(map(str, self.flat))


# ---------------------------------------------------------------------------
# coercion and parsing

_NUM_LIST = re.compile(r"^\(\s*(\d+(\s*,\s*\d+)*)?\s*\)$")
_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_index(text: str) -> Index:
    """Parse ``"(3,1)"``, ``"()"`` or ``"∅"``."""
    return Index(_parse_int_tuple(text))


def _parse_int_tuple(text):
    t = text.strip()
    if t in ("∅", ""):
        return ()
    if not _NUM_LIST.match(t):
        raise ParseError(f"cannot parse integer tuple from {text!r}")
    inner = t[1:-1].strip()
    return tuple(int(x) for x in inner.split(",")) if inner else ()


def parse_pair_composition(text: str) -> PairComposition:
    """Parse ``"((2,1),(1,2))"`` or the flat ``"(2,1,1,2)"``."""
    t = re.sub(r"\s+", "", text)
    if t.startswith("(("):
        if not re.fullmatch(r"\((\(\d+,\d+\))(,\(\d+,\d+\))*\)", t):
            raise ParseError(f"cannot parse pair composition from {text!r}")
        pairs = tuple((int(a), int(b)) for a, b in _PAIR.findall(t))
        return PairComposition(pairs)
    flat = _parse_int_tuple(t)
    if not flat or len(flat) % 2:
        raise ParseError(f"pair composition needs an even, nonzero number of entries: {text!r}")
    return PairComposition.from_flat(flat)


def as_index(k) -> Index:
    if isinstance(k, Index):
        return k
    if isinstance(k, str):
        return parse_index(k)
    if isinstance(k, _Parts):
        return Index(k.parts)
    return Index(tuple(k))


def as_composition(c) -> Composition:
    if isinstance(c, Composition):
        return c
    if isinstance(c, str):
        return Composition(_parse_int_tuple(c))
    if isinstance(c, _Parts):
        return Composition(c.parts)
    return Composition(tuple(c))


def as_pair_composition(pc) -> PairComposition:
    if isinstance(pc, PairComposition):
        return pc
    if isinstance(pc, str):
        return parse_pair_composition(pc)
    pc = tuple(pc)
    if pc and isinstance(pc[0], (tuple, list)):
        return PairComposition(pc)
    return PairComposition.from_flat(pc)


# ---------------------------------------------------------------------------
# operations


def normalize(raw: Iterable[int]) -> Composition:
    """Remove zeros: ``(..., x, 0, y, ...)`` becomes ``(..., x + y, ...)``.

    A run of zeros between ``x`` and ``y`` merges them when its length is odd
    and simply disappears when it is even.  Zeros at either end have a
    missing (zero) neighbour and vanish.
    """
    out = []
    merge = False
    for c in raw:
        c = int(c)
        if c < 0:
            raise DomainError(f"negative entry {c} in {tuple(raw)}")
        if c == 0:
            if out:
                merge = not merge
            continue
        if merge:
            out[-1] += c
            merge = False
        else:
            out.append(c)
    return Composition(tuple(out))


def _raw(x) -> tuple:
    if isinstance(x, _Parts):
        return x.parts
    if isinstance(x, str):
        return _parse_int_tuple(x)
    return tuple(x)


def precedes(c, d) -> bool:
    """``c`` is obtained from ``d`` by decreasing some entries (equality allowed).

    Entries may be decreased down to zero; both sides are compared after
    zero-normalization.
    """
    c, d = normalize(_raw(c)), normalize(_raw(d))
    if c.weight > d.weight:
        return False
    return c in _lower_set(d.parts)


def strictly_precedes(c, d) -> bool:
    c, d = normalize(_raw(c)), normalize(_raw(d))
    return c != d and precedes(c, d)


_LOWER_CACHE: dict = {}


def _lower_set(parts: tuple) -> frozenset:
    hit = _LOWER_CACHE.get(parts)
    if hit is None:
        hit = frozenset(normalize(t) for t in itertools.product(*(range(p + 1) for p in parts)))
        if len(_LOWER_CACHE) < 4096:
            _LOWER_CACHE[parts] = hit
    return hit


def kappa(pc) -> Index:
    """``((a_i, b_i)) -> (a_1+1, 1^(b_1-1), ..., a_s+1, 1^(b_s-1))``."""
    pc = as_pair_composition(pc)
    out = []
    for a, b in pc.pairs:
        out.append(a + 1)
        out.extend([1] * (b - 1))
    return Index(tuple(out))


def kappa_inv(k) -> PairComposition:
    """Inverse of :func:`kappa` on nonempty admissible indices."""
    k = as_index(k)
    if not k.parts:
        raise DomainError("the empty index has no pair composition")
    if not k.admissible:
        raise DomainError(f"{k} is not admissible")
    pairs = []
    for e in k.parts:
        if e >= 2:
            pairs.append([e - 1, 1])
        else:
            pairs[-1][1] += 1
    return PairComposition(tuple(map(tuple, pairs)))


def dual(k) -> Index:
    """Dual index; the empty index is self-dual."""
    k = as_index(k)
    if not k.parts:
        return k
    if not k.admissible:
        raise DomainError(f"{k} is not admissible")
    return kappa(kappa_inv(k).reversed_swapped())


def enumerate_compositions(k: int, length: int | None = None) -> list:
    """All compositions of ``k``, ordered lexicographically descending.

    ``k = 0`` gives ``[()]``.
    """
    if k < 0:
        raise DomainError("cannot compose a negative integer")
    if k == 0:
        return [Composition(())] if length in (None, 0) else []
    out = []

    def rec(rest, prefix):
        if rest == 0:
            if length is None or len(prefix) == length:
                out.append(Composition(tuple(prefix)))
            return
        if length is not None and len(prefix) >= length:
            return
        for first in range(rest, 0, -1):
            prefix.append(first)
            rec(rest - first, prefix)
            prefix.pop()

    rec(k, [])
    return out


def enumerate_pair_compositions(weight: int) -> list:
    """All pair compositions of total weight ``weight``."""
    if weight < 2:
        raise DomainError("pair compositions have weight at least 2")
    return [PairComposition.from_flat(c.parts)
            for c in enumerate_compositions(weight) if len(c) % 2 == 0]


def enumerate_indices(weight: int, depth: int | None = None) -> list:
    """All indices of the given weight (optionally depth), same order as compositions."""
    return [Index(c.parts) for c in enumerate_compositions(weight, depth)]


def enumerate_admissible(weight: int, depth: int | None = None) -> list:
    return [k for k in enumerate_indices(weight, depth) if k.admissible]
