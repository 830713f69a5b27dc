"""Finite binary words and the balanced-word algebra used by the scheduler.

Words are written over {0, 1} and indexed 1-based, matching the usual
combinatorics-on-words conventions.  The module provides rotation,
transposition, balancedness testing, mechanical-word construction, the
alpha coefficient linking transposition to rotation, and ultimately
periodic schedules of the shape ``u.(v)*``.

A word of length p with k ones is *balanced* when every pair of
equal-length factors of its infinite repetition differs by at most one
in its count of ones.  The balanced words with parameters (k, p) form a
single rotation orbit; transposing a balanced word at its unique
balance-preserving location equals rotating it by -alpha, where
``-k * alpha = 1 (mod p)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd

from .errors import (
    GraphFormatError,
    NotBalanced,
    NotCoprime,
    UndefinedTransposition,
)

__all__ = [
    "BinaryWord",
    "PeriodicSchedule",
    "AlphaCoefficient",
    "word",
    "rotate",
    "orbit",
    "is_balanced",
    "mechanical_word",
    "transpose_at",
    "canonical_delta",
    "balanced_transpose",
    "alpha",
    "compare_lex",
    "balanced_words",
    "primitive_root",
    "parse_schedule",
]


@total_ordering
@dataclass(frozen=True)
class BinaryWord:
    """Immutable finite word over {0, 1}.

    The empty word is allowed; rotation and comparison are total on it,
    while the balanced-word operations require a nonempty argument.
    Ordering is lexicographic with 0 < 1 and a strict prefix smaller
    than its extensions.
    """

    bits: str

    def __post_init__(self):
        if not set(self.bits) <= {"0", "1"}:
            raise ValueError(f"not a binary word: {self.bits!r}")

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return self.bits

    def __lt__(self, other: "BinaryWord") -> bool:
        return self.bits < other.bits

    def __iter__(self):
        return (int(b) for b in self.bits)

    def at(self, i: int) -> int:
        """The i-th letter, 1-based."""
        if not 1 <= i <= len(self.bits):
            raise IndexError(f"position {i} out of range 1..{len(self.bits)}")
        return int(self.bits[i - 1])

    @property
    def ones(self) -> int:
        return self.bits.count("1")

    @property
    def zeros(self) -> int:
        return self.bits.count("0")

    @property
    def slope(self) -> Fraction:
        if not self.bits:
            raise ValueError("slope of the empty word is undefined")
        return Fraction(self.ones, len(self.bits))

    def times(self, x: int) -> "BinaryWord":
        """The x-fold repetition of this word."""
        return BinaryWord(self.bits * x)


def word(bits: str) -> BinaryWord:
    """Shorthand constructor: ``word("0101011")``."""
    return BinaryWord(bits)


def compare_lex(u: BinaryWord, v: BinaryWord) -> int:
    """Total lexicographic order: -1, 0 or 1.

    0 < 1, and a proper prefix precedes any of its extensions.
    """
    if u.bits == v.bits:
        return 0
    return -1 if u.bits < v.bits else 1


def rotate(u: BinaryWord, n: int) -> BinaryWord:
    """Rotate forward n times: one forward rotation moves the last
    letter to the front.  Negative n rotates backward; the empty word is
    a fixed point."""
    p = len(u)
    if p == 0:
        return u
    n %= p
    if n == 0:
        return u
    return BinaryWord(u.bits[-n:] + u.bits[:-n])


def orbit(u: BinaryWord) -> set[BinaryWord]:
    """All distinct rotations of u."""
    if len(u) == 0:
        raise ValueError("orbit of the empty word is undefined")
    return {rotate(u, n) for n in range(len(u))}


def is_balanced(u: BinaryWord) -> bool:
    """Whether every pair of equal-length factors of ``u``'s infinite
    repetition carries a count of ones differing by at most 1.

    Checking lengths 1..|u| over the doubled word suffices: a longer
    factor is a whole number of periods plus a factor of length at most
    |u|, and whole periods contribute equally to both factors.
    """
    n = len(u)
    if n == 0:
        raise ValueError("balancedness of the empty word is undefined")
    doubled = int(u.bits + u.bits, 2) if "1" in u.bits else 0
    if doubled == 0 or u.zeros == 0:
        return True
    for length in range(1, n + 1):
        mask = (1 << length) - 1
        lo = hi = ((doubled >> (2 * n - length)) & mask).bit_count()
        for start in range(1, n):
            ones = ((doubled >> (2 * n - start - length)) & mask).bit_count()
            if ones < lo:
                lo = ones
            elif ones > hi:
                hi = ones
            if hi - lo > 1:
                return False
    return True


def mechanical_word(k: int, p: int) -> BinaryWord:
    """The length-p word with ``u(i) = floor(i*k/p) - floor((i-1)*k/p)``.

    It is balanced, carries exactly k ones, and is the lexicographically
    smallest word of its rotation orbit.
    """
    if not 0 < k <= p:
        raise ValueError(f"mechanical word needs 0 < k <= p, got ({k}, {p})")
    return BinaryWord(
        "".join(str(i * k // p - (i - 1) * k // p) for i in range(1, p + 1))
    )


def balanced_words(k: int, p: int) -> list[BinaryWord]:
    """All balanced words of length p with k ones, sorted lexicographically.

    They form the rotation orbit of the mechanical word; when k and p
    share a factor x the orbit has p/x elements, each the x-fold
    repetition of a primitive balanced word.
    """
    return sorted(orbit(mechanical_word(k, p)))


def primitive_root(u: BinaryWord) -> tuple[BinaryWord, int]:
    """Decompose u as ``v^x`` with v of minimal length; returns (v, x)."""
    n = len(u)
    if n == 0:
        raise ValueError("the empty word has no primitive root")
    for d in range(1, n + 1):
        if n % d == 0 and u.bits == u.bits[:d] * (n // d):
            return BinaryWord(u.bits[:d]), n // d
    raise AssertionError("unreachable")


def transpose_at(u: BinaryWord, delta: int) -> BinaryWord:
    """Swap the "10" starting at position delta into "01".

    For delta = |u| the wrap form applies: a word shaped ``0.w.1`` maps
    to ``1.w.0``.  Any other configuration is undefined.
    """
    n = len(u)
    if not 1 <= delta <= n:
        raise UndefinedTransposition(f"location {delta} out of range 1..{n}")
    if delta < n:
        if u.at(delta) == 1 and u.at(delta + 1) == 0:
            b = u.bits
            return BinaryWord(b[: delta - 1] + "01" + b[delta + 1 :])
        raise UndefinedTransposition(
            f"no '10' at location {delta} of {u.bits}"
        )
    if n >= 2 and u.at(1) == 0 and u.at(n) == 1:
        return BinaryWord("1" + u.bits[1:-1] + "0")
    raise UndefinedTransposition(
        f"wrap transposition needs the shape 0...1, got {u.bits}"
    )


def canonical_delta(u: BinaryWord) -> int:
    """The unique location where transposing keeps the word balanced.

    Locating u as the n-th rotation of the smallest word of its orbit
    gives the location directly: it is n (taken in 1..p), the last
    position for the smallest word itself.  Non-primitive words are
    handled through their primitive root and the returned location lies
    within the first period.
    """
    if not is_balanced(u):
        raise NotBalanced(f"{u.bits} is not balanced")
    v, _ = primitive_root(u)
    if v.zeros == 0 or v.ones == 0:
        raise UndefinedTransposition(
            f"transposition undefined on the constant word {u.bits}"
        )
    p = len(v)
    smallest = min(orbit(v))
    for n in range(p):
        if rotate(smallest, n) == v:
            return p if n == 0 else n
    raise AssertionError("unreachable: balanced word not in its own orbit")


def _transpose_once(v: BinaryWord) -> BinaryWord:
    return transpose_at(v, canonical_delta(v))


def _untranspose_once(w: BinaryWord) -> BinaryWord:
    # The transposition is a bijection of the orbit, so invert by search.
    for v in sorted(orbit(w)):
        if _transpose_once(v) == w:
            return v
    raise NotBalanced(f"{w.bits} has no balanced preimage under transposition")


def balanced_transpose(u: BinaryWord, n: int = 1) -> BinaryWord:
    """n-fold balance-preserving transposition (negative n inverts).

    Acts on the primitive root and repeats the result, so non-primitive
    words transpose within every period simultaneously.
    """
    if not is_balanced(u):
        raise NotBalanced(f"{u.bits} is not balanced")
    v, x = primitive_root(u)
    step = _transpose_once if n >= 0 else _untranspose_once
    for _ in range(abs(n)):
        v = step(v)
    return v.times(x)


@dataclass(frozen=True)
class AlphaCoefficient:
    """The inverse of -k modulo p, for coprime 0 < k < p.

    Rotating a balanced word of parameters (k, p) backward by alpha
    equals transposing it at its canonical location; n delays therefore
    turn into a rotation of spin -n*alpha.
    """

    k: int
    p: int
    alpha: int

    def __post_init__(self):
        if (-self.k * self.alpha) % self.p != 1:
            raise ValueError(f"{self.alpha} is not the inverse of -{self.k} mod {self.p}")


def alpha(k: int, p: int) -> AlphaCoefficient:
    """Compute the alpha coefficient for a coprime pair 0 < k < p."""
    if not 0 < k < p:
        raise NotCoprime(f"alpha requires 0 < k < p, got ({k}, {p})")
    if gcd(k, p) != 1:
        raise NotCoprime(f"({k}, {p}) are not coprime")
    return AlphaCoefficient(k, p, pow(-k % p, -1, p))


_SCHEDULE_RE = re.compile(r"^(?:([01]*)\.)?\(([01]+)\)\*$")


@dataclass(frozen=True)
class PeriodicSchedule:
    """An ultimately periodic activity word ``initial.(steady)^omega``.

    ``steady`` must be nonempty and contain at least one 1; the
    periodicity k is its count of ones and the period p its length.
    Renders as ``u.(v)*``, or ``(v)*`` when the initial part is empty.
    """

    initial: BinaryWord
    steady: BinaryWord

    def __post_init__(self):
        if len(self.steady) == 0 or self.steady.ones == 0:
            raise ValueError("steady part must be nonempty with at least one 1")

    @property
    def k(self) -> int:
        return self.steady.ones

    @property
    def p(self) -> int:
        return len(self.steady)

    @property
    def slope(self) -> Fraction:
        return self.steady.slope

    def bit(self, i: int) -> int:
        """Activity at instant i (1-based), reading into the steady part."""
        if i <= 0:
            raise IndexError("instants are numbered from 1")
        if i <= len(self.initial):
            return self.initial.at(i)
        return self.steady.at((i - len(self.initial) - 1) % self.p + 1)

    def render(self) -> str:
        if len(self.initial) == 0:
            return f"({self.steady.bits})*"
        return f"{self.initial.bits}.({self.steady.bits})*"

    def __str__(self) -> str:
        return self.render()


def parse_schedule(text: str) -> PeriodicSchedule:
    """Parse the ``u.(v)*`` / ``(v)*`` rendering back into a schedule."""
    m = _SCHEDULE_RE.match(text.strip())
    if not m:
        raise GraphFormatError(f"not a schedule: {text!r}")
    initial = m.group(1) or ""
    return PeriodicSchedule(BinaryWord(initial), BinaryWord(m.group(2)))
