"""Exact arithmetic for dimension main terms at square-free levels.

Everything here is rational: the weight polynomial, the divisor
convolutions over a square-free level, and the sign split of a trace
pair.  Results are Fractions; callers convert to float only at the
export boundary.  Remainder terms below the main terms are not modeled,
and reports say so explicitly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .hecke import _factorize

__all__ = [
    "LevelData",
    "DimensionReport",
    "omega",
    "dim_main_term",
    "dim_newform_main_term",
    "newform_trace",
    "oldform_table",
    "pm_trace_split",
    "c_constant",
    "dimension_report",
]

UNMODELED_NOTE = "remainder terms below the main term are not modeled"


def omega(m: int) -> int:
    """Number of distinct prime factors."""
    m = int(m)
    if m < 1:
        raise ValueError("argument must be >= 1")
    return len(_factorize(m))


@dataclass(frozen=True)
class LevelData:
    """A square-free level with its prime factorization spelled out."""

    n: int
    factorization: tuple
    omega: int

    @classmethod
    def from_level(cls, n: int) -> "LevelData":
        n = int(n)
        if n < 1:
            raise ValueError("level must be >= 1")
        fac = _factorize(n)
        if any(v > 1 for v in fac.values()):
            raise ValueError("level must be square-free, got %d" % (n,))
        primes = tuple(sorted(fac))
        return cls(n=n, factorization=primes, omega=len(primes))

    def __post_init__(self):
        prod = 1
        for p in self.factorization:
            prod *= p
        if prod != self.n:
            raise ValueError("factorization does not multiply to the level")
        if len(set(self.factorization)) != len(self.factorization):
            raise ValueError("factorization must list distinct primes")
        if self.omega != len(self.factorization):
            raise ValueError("omega must equal the number of prime factors")

    def divisors(self) -> tuple:
        out = []
        for r in range(len(self.factorization) + 1):
            for combo in itertools.combinations(self.factorization, r):
                d = 1
                for p in combo:
                    d *= p
                out.append(d)
        return tuple(sorted(out))


def _weight_poly(k1: int, k2: int) -> int:
    if not (isinstance(k1, int) and isinstance(k2, int)):
        raise ValueError("weights must be integers")
    if not k1 >= k2 >= 4:
        raise ValueError("dimension formulas need k1 >= k2 >= 4, got (%r, %r)"
                         % (k1, k2))
    return (k1 - 1) * (k2 - 2) * (k1 - k2 + 1) * (k1 + k2 - 3)


def dim_main_term(k1: int, k2: int, level: LevelData) -> Fraction:
    """Leading dimension term: weight polynomial times prod (p^2 + 1)."""
    total = Fraction(_weight_poly(k1, k2), 2 ** 7 * 3 ** 3 * 5)
    for p in level.factorization:
        total *= p * p + 1
    return total


def dim_newform_main_term(k1: int, k2: int, level: LevelData) -> Fraction:
    """Leading new-subspace term: half constant, prod (p^2 - 1) instead."""
    total = Fraction(_weight_poly(k1, k2), 2 ** 8 * 3 ** 3 * 5)
    for p in level.factorization:
        total *= p * p - 1
    return total


def newform_trace(traces, level: LevelData):
    """Divisor convolution sum of (-2)^omega(M) * traces[N/M].

    `traces` must assign a value to every divisor of the level; values
    may be ints, Fractions, or floats and are combined exactly when the
    inputs are exact.
    """
    divs = level.divisors()
    missing = [d for d in divs if d not in traces]
    if missing:
        raise KeyError("trace table is missing divisors %s" % (missing,))
    total = 0
    for m in divs:
        total += (-2) ** omega(m) * traces[level.n // m]
    return total


def oldform_table(new_traces, level: LevelData) -> dict:
    """Forward relation: full-space traces from new-subspace ones.

    Returns, for every divisor d of the level, the sum over M | d of
    2^omega(M) * new_traces[d/M].  Feeding the result back through
    newform_trace recovers new_traces exactly.
    """
    divs = level.divisors()
    missing = [d for d in divs if d not in new_traces]
    if missing:
        raise KeyError("trace table is missing divisors %s" % (missing,))
    out = {}
    for d in divs:
        total = 0
        for m in LevelData.from_level(d).divisors():
            total += 2 ** omega(m) * new_traces[d // m]
        out[d] = total
    return out


def pm_trace_split(trace_plain, trace_atkin_lehner, k2: int):
    """Split a trace into sign eigenspace halves.

    The involution trace enters with the parity sign of the smaller
    weight.  Both halves are exact rationals, so plus + minus returns
    the plain trace without rounding.
    """
    sign = -1 if int(k2) % 2 else 1
    plain = Fraction(trace_plain)
    signed = sign * Fraction(trace_atkin_lehner)
    return ((plain + signed) / 2, (plain - signed) / 2)


def c_constant(level: LevelData) -> Fraction:
    """The level-normalized factor prod (1 + p^-2); degenerates to 1 at
    level one and otherwise lies strictly between 1 and 5."""
    c = Fraction(1)
    for p in level.factorization:
        c *= Fraction(p * p + 1, p * p)
    if level.n > 1 and not Fraction(1) < c < Fraction(5):
        raise RuntimeError("level constant %s escaped its (1, 5) bound"
                           % (c,))
    return c


@dataclass(frozen=True)
class DimensionReport:
    """Main-term dimensions for one weight pair and level."""

    k1: int
    k2: int
    level: LevelData
    main_term: Fraction
    newform_main_term: Fraction
    c: Fraction
    unmodeled_error: str = UNMODELED_NOTE

    def to_json_dict(self):
        return {
            "k1": self.k1,
            "k2": self.k2,
            "N": self.level.n,
            "dim_main": float(self.main_term),
            "dim_main_exact": str(self.main_term),
            "dim_new_main": float(self.newform_main_term),
            "dim_new_main_exact": str(self.newform_main_term),
            "c_N": float(self.c),
            "unmodeled_error": self.unmodeled_error,
        }


def dimension_report(k1: int, k2: int, level: LevelData) -> DimensionReport:
    return DimensionReport(
        k1=k1,
        k2=k2,
        level=level,
        main_term=dim_main_term(k1, k2, level),
        newform_main_term=dim_newform_main_term(k1, k2, level),
        c=c_constant(level),
    )
