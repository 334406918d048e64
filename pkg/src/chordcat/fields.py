"""Exact coefficient fields: the rationals and prime fields F_p.

Every computation in this package is exact.  A :class:`Field` is a small
descriptor object; field elements are either ``fractions.Fraction`` (for Q)
or :class:`FpElement` wrappers (for F_p), both supporting ordinary
arithmetic operators so matrix code stays field-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


DEFAULT_PRIME = 32003


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class FpElement:
    """An element of F_p.  Immutable; arithmetic stays inside the field."""

    __slots__ = ("val", "p")

    def __init__(self, val: int, p: int):
        self.val = val % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, FpElement):
            if other.p != self.p:
                raise ValueError(f"mixed primes: F_{self.p} vs F_{other.p}")
            return other
        if isinstance(other, int):
            return FpElement(other, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FpElement(self.val + o.val, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FpElement(self.val - o.val, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FpElement(o.val - self.val, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FpElement(self.val * o.val, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.val == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return FpElement(self.val * pow(o.val, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __neg__(self):
        return FpElement(-self.val, self.p)

    def __eq__(self, other):
        if isinstance(other, FpElement):
            return self.p == other.p and self.val == other.val
        if isinstance(other, int):
            return self.val == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.val, self.p))

    def __bool__(self):
        return self.val != 0

    def __repr__(self):
        return f"{self.val}"


@dataclass(frozen=True)
class Field:
    """The rationals when ``p`` is None, otherwise F_p with p prime."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None and not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    @property
    def name(self) -> str:
        return "Q" if self.p is None else f"F{self.p}"

    def zero(self):
        return Fraction(0) if self.p is None else FpElement(0, self.p)

    def one(self):
        return Fraction(1) if self.p is None else FpElement(1, self.p)

    def of(self, n):
        """Coerce an int, Fraction, or FpElement into this field."""
        if self.p is None:
            if isinstance(n, FpElement):
                raise ValueError("cannot coerce an F_p element into Q")
            return Fraction(n)
        if isinstance(n, FpElement):
            if n.p != self.p:
                raise ValueError(f"mixed primes: F_{self.p} vs F_{n.p}")
            return n
        if isinstance(n, Fraction):
            if n.denominator == 1:
                return FpElement(n.numerator, self.p)
            return FpElement(n.numerator, self.p) / FpElement(n.denominator, self.p)
        return FpElement(int(n), self.p)

    def parse(self, s) -> object:
        """Parse a serialized scalar: "a/b" strings for Q, ints for F_p."""
        if self.p is None:
            return Fraction(str(s))
        return FpElement(int(s), self.p)

    def unparse(self, x) -> str:
        return str(x)

    def to_json(self):
        return "Q" if self.p is None else {"Fp": self.p}

    @staticmethod
    def from_json(obj) -> "Field":
        if obj == "Q":
            return Field()
        if isinstance(obj, dict) and "Fp" in obj:
            return Field(int(obj["Fp"]))
        raise ValueError(f"bad field descriptor: {obj!r}")

    @staticmethod
    def from_spec(spec: str) -> "Field":
        """Parse CLI-style field specs: "Q", "Fp", "Fp:65537", "F65537"."""
        s = spec.strip()
        if s in ("Q", "q"):
            return Field()
        if s.lower() in ("fp", "f_p"):
            return Field(DEFAULT_PRIME)
        for prefix in ("Fp:", "fp:", "F", "f"):
            if s.startswith(prefix):
                return Field(int(s[len(prefix):]))
        raise ValueError(f"bad field spec: {spec!r}")


QQ = Field()
