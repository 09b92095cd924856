"""Synthetic families with independent local data at finitely many primes.

A family draws, for every prime in its window, one point per form from
that prime's vertical measure, and attaches a functional-equation sign
by a rule that never looks at the drawn data.  The construction
realizes the limiting distribution of a growing family directly, so
averaged Dirichlet coefficients can be compared against closed-form
main terms with Monte Carlo error bars as the only uncertainty.
"""

from __future__ import annotations

import csv
import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import measures
from .hecke import (FormShape, SpinSatake, _factorize, multiplicative_coeff,
                    spin_coeff_grid, spin_root_number_level_one,
                    std_coeff_grid)
from .measures import SatakePoint

__all__ = [
    "EPSILON_RULES",
    "FamilySpec",
    "SyntheticForm",
    "Family",
    "AverageReport",
    "StdMainTerm",
    "MonomialEntry",
    "JointMomentReport",
    "SplitReport",
    "generate_family",
    "coefficient_values",
    "coefficient",
    "average_coefficient",
    "main_term_spin",
    "main_term_std",
    "joint_sato_tate_test",
    "plus_minus_split_test",
    "std_square_deviation",
    "write_family_csv",
]

EPSILON_RULES = ("level_one_parity", "balanced")

# the sign rule is decoupled from the sampled local data on purpose;
# every split report repeats this so downstream readers see the model
SIGN_MODEL_NOTE = "signs assigned independently of the sampled local data"


@dataclass(frozen=True)
class FamilySpec:
    """Prime window, family size, seed, and sign rule for a simulation."""

    primes: tuple
    forms: int
    seed: int
    epsilon_rule: str = "balanced"
    shape: FormShape = FormShape(4, 3, 1)

    def __post_init__(self):
        primes = tuple(int(p) for p in self.primes)
        object.__setattr__(self, "primes", primes)
        if not primes:
            raise ValueError("need at least one prime")
        if len(set(primes)) != len(primes):
            raise ValueError("primes must be distinct")
        for p in primes:
            measures.check_prime(p)
        if self.forms < 1:
            raise ValueError("forms must be >= 1")
        if self.epsilon_rule not in EPSILON_RULES:
            raise ValueError("epsilon_rule must be one of %s"
                             % (EPSILON_RULES,))


@dataclass(frozen=True)
class SyntheticForm:
    """One simulated form: local data per prime plus its sign."""

    id: int
    satake: dict
    shape: FormShape
    spin_epsilon: int


class Family(Sequence):
    """Sampled family; array-backed, indexable as SyntheticForm records.

    `points[p]` is the (forms, 2) array of eigenvalue coordinates at
    prime p and `epsilons` the per-form sign array; treat both as
    read-only.
    """

    def __init__(self, spec: FamilySpec, points: dict, epsilons):
        self._spec = spec
        self._points = {int(p): np.asarray(v, dtype=float)
                        for p, v in points.items()}
        self._eps = np.asarray(epsilons, dtype=int)
        for p in spec.primes:
            if self._points[p].shape != (spec.forms, 2):
                raise ValueError("point array at prime %d has shape %s"
                                 % (p, self._points[p].shape))
        if self._eps.shape != (spec.forms,):
            raise ValueError("epsilon array has the wrong length")

    @property
    def spec(self) -> FamilySpec:
        return self._spec

    @property
    def points(self) -> dict:
        return self._points

    @property
    def epsilons(self):
        return self._eps

    def __len__(self):
        return self._spec.forms

    def __getitem__(self, i):
        n = len(self)
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(n))]
        i = int(i)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError("form index out of range")
        satake = {p: SatakePoint(float(arr[i, 0]), float(arr[i, 1]))
                  for p, arr in sorted(self._points.items())}
        return SyntheticForm(id=i, satake=satake, shape=self._spec.shape,
                             spin_epsilon=int(self._eps[i]))


_VM_CACHE: dict = {}


def _vertical(p):
    if p not in _VM_CACHE:
        _VM_CACHE[p] = measures.vertical_measure(p)
    return _VM_CACHE[p]


def _epsilons(spec: FamilySpec):
    if spec.epsilon_rule == "level_one_parity":
        return np.full(spec.forms, spin_root_number_level_one(spec.shape.k2),
                       dtype=int)
    return np.where(np.arange(spec.forms) % 2 == 0, 1, -1)


def generate_family(spec: FamilySpec) -> Family:
    """Draw every form's local data; deterministic given the seed.

    Each prime uses its own counter-based stream keyed by (seed, p), and
    each form its own per-index substream, so the result is independent
    of batching or evaluation order.
    """
    points = {p: measures.sample_array(_vertical(p), (spec.seed, p),
                                       spec.forms)
              for p in spec.primes}
    return Family(spec, points, _epsilons(spec))


# ---------------------------------------------------------------------------
# coefficient averages


def coefficient_values(family: Family, m: int, which: str = "spin"):
    """Per-form Dirichlet coefficient at m, vectorized over the family."""
    if which not in ("spin", "std"):
        raise ValueError("which must be 'spin' or 'std'")
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    vals = np.ones(len(family))
    for p, v in sorted(_factorize(m).items()):
        if p not in family.points:
            raise KeyError("prime %d divides %d but lies outside the family "
                           "window" % (p, m))
        a = family.points[p][:, 0]
        b = family.points[p][:, 1]
        grid = (spin_coeff_grid(a, b, v) if which == "spin"
                else std_coeff_grid(a, b, v))
        vals = vals * grid[v]
    return vals


def coefficient(form: SyntheticForm, m: int, which: str = "spin") -> float:
    """Coefficient at m of a single form, via the per-prime assignment."""
    assignment = {p: SpinSatake.from_point(pt)
                  for p, pt in form.satake.items()}
    return multiplicative_coeff(assignment, m, which)


def _mean_stderr(values):
    vals = [float(v) for v in np.asarray(values).ravel()]
    n = len(vals)
    mean = math.fsum(vals) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = 0.0
    return mean, stderr


def _z_against(mean, stderr, prediction):
    if stderr > 0.0:
        return (mean - prediction) / stderr
    return 0.0 if mean == prediction else math.inf


@dataclass(frozen=True)
class AverageReport:
    """Sample mean of a coefficient against its closed-form main term."""

    m: int
    which: str
    estimate: float
    stderr: float
    prediction: float
    z_score: float

    def to_json_dict(self):
        return {
            "m": self.m,
            "which": self.which,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "prediction": self.prediction,
            "z": self.z_score,
        }


def average_coefficient(family: Family, m: int,
                        which: str = "spin") -> AverageReport:
    """Ensemble mean and standard error of the coefficient at m."""
    vals = coefficient_values(family, m, which)
    mean, stderr = _mean_stderr(vals)
    if which == "spin":
        prediction = main_term_spin(m)
    else:
        prediction = main_term_std(m).value
    return AverageReport(m=int(m), which=which, estimate=mean, stderr=stderr,
                         prediction=prediction,
                         z_score=_z_against(mean, stderr, prediction))


def main_term_spin(m: int) -> float:
    """Limiting average of the degree-4 coefficient at m.

    Zero unless m is a perfect square; otherwise the square root's
    reciprocal times, for each prime power p^v exactly dividing m, the
    sum 1 + p^-2 + ... + p^-v.  Evaluated in exact rationals, then
    rounded once.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    fac = _factorize(m)
    if any(v % 2 for v in fac.values()):
        return 0.0
    total = Fraction(1, math.isqrt(m))
    for p, v in fac.items():
        total *= sum(Fraction(1, p ** (2 * i)) for i in range(v // 2 + 1))
    return float(total)


@dataclass(frozen=True)
class StdMainTerm:
    """Leading term of the degree-5 coefficient average.

    `value` is the square-indicator product; the first correction is an
    unresolved degree-one term in 1/p, so `band` records 1/min(p | m)
    as the half-width of the unknown part (0 when m = 1).
    """

    value: float
    band: float


def main_term_std(m: int) -> StdMainTerm:
    m = int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    fac = _factorize(m)
    value = 0.0 if any(v % 2 for v in fac.values()) else 1.0
    band = 1.0 / min(fac) if fac else 0.0
    return StdMainTerm(value=value, band=band)


# ---------------------------------------------------------------------------
# joint equidistribution


_MOMENT_CACHE: dict = {}


def _prime_moment(p, e, f):
    """Quadrature moment of x^e y^f at prime p; symmetric in (e, f)."""
    key = (p, e, f) if e >= f else (p, f, e)
    if key not in _MOMENT_CACHE:
        _, ke, kf = key[0], key[1], key[2]
        _MOMENT_CACHE[key] = float(measures.integrate(
            _vertical(p), lambda x, y: x ** ke * y ** kf, tol=1e-9))
    return _MOMENT_CACHE[key]


@dataclass(frozen=True)
class MonomialEntry:
    """One mixed moment: empirical mean against the product prediction."""

    label: str
    exponents: tuple
    estimate: float
    stderr: float
    prediction: float
    z_score: float

    def to_json_dict(self):
        return {
            "monomial": self.label,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "prediction": self.prediction,
            "z": self.z_score,
        }


@dataclass(frozen=True)
class JointMomentReport:
    """All mixed moments up to a degree over a subset of the primes."""

    primes: tuple
    max_degree: int
    entries: tuple
    max_abs_z: float

    def to_json_dict(self):
        return {
            "primes": list(self.primes),
            "max_degree": self.max_degree,
            "max_abs_z": self.max_abs_z,
            "moments": [e.to_json_dict() for e in self.entries],
        }


def _monomial_label(primes, exps):
    parts = []
    for p, (e, f) in zip(primes, exps):
        if e:
            parts.append("a%d^%d" % (p, e))
        if f:
            parts.append("b%d^%d" % (p, f))
    return "*".join(parts)


def joint_sato_tate_test(family: Family, primes_subset,
                         max_degree: int) -> JointMomentReport:
    """Mixed moments across primes against products of per-prime moments.

    Agreement of every monomial with the product of its single-prime
    quadrature moments is exactly the statement that the local data are
    jointly equidistributed for the product measure.
    """
    primes = tuple(int(p) for p in primes_subset)
    if len(set(primes)) != len(primes):
        raise ValueError("primes_subset must be distinct")
    for p in primes:
        if p not in family.points:
            raise ValueError("prime %d is not in the family window" % (p,))
    if not 1 <= max_degree <= 4:
        raise ValueError("max_degree must lie in 1..4")
    per_prime = [[(e, f) for e in range(max_degree + 1)
                  for f in range(max_degree + 1 - e)]
                 for _ in primes]
    entries = []
    for exps in itertools.product(*per_prime):
        total = sum(e + f for e, f in exps)
        if not 1 <= total <= max_degree:
            continue
        vals = np.ones(len(family))
        prediction = 1.0
        for p, (e, f) in zip(primes, exps):
            a = family.points[p][:, 0]
            b = family.points[p][:, 1]
            if e:
                vals = vals * a ** e
            if f:
                vals = vals * b ** f
            if e or f:
                prediction *= _prime_moment(p, e, f)
        mean, stderr = _mean_stderr(vals)
        entries.append(MonomialEntry(
            label=_monomial_label(primes, exps),
            exponents=exps,
            estimate=mean,
            stderr=stderr,
            prediction=prediction,
            z_score=_z_against(mean, stderr, prediction)))
    entries.sort(key=lambda ent: (sum(e + f for e, f in ent.exponents),
                                  ent.exponents))
    max_abs_z = max(abs(e.z_score) for e in entries)
    return JointMomentReport(primes=primes, max_degree=int(max_degree),
                             entries=tuple(entries), max_abs_z=max_abs_z)


# ---------------------------------------------------------------------------
# sign-split averages


@dataclass(frozen=True)
class SplitReport:
    """Coefficient averages over the two sign subfamilies."""

    m: int
    plus: AverageReport
    minus: AverageReport
    balance: float
    note: str

    def to_json_dict(self):
        return {
            "m": self.m,
            "plus": self.plus.to_json_dict(),
            "minus": self.minus.to_json_dict(),
            "balance": self.balance,
            "note": self.note,
        }


def plus_minus_split_test(family: Family, m: int) -> SplitReport:
    """Spin-coefficient averages restricted to each sign subfamily."""
    if family.spec.epsilon_rule != "balanced":
        raise ValueError("split test needs the balanced sign rule")
    vals = coefficient_values(family, m, "spin")
    prediction = main_term_spin(m)
    reports = {}
    counts = {}
    for sign, tag in ((1, "plus"), (-1, "minus")):
        sub = vals[family.epsilons == sign]
        counts[tag] = len(sub)
        mean, stderr = _mean_stderr(sub)
        reports[tag] = AverageReport(
            m=int(m), which="spin", estimate=mean, stderr=stderr,
            prediction=prediction,
            z_score=_z_against(mean, stderr, prediction))
    balance = abs(counts["plus"] - counts["minus"]) / len(family)
    return SplitReport(m=int(m), plus=reports["plus"], minus=reports["minus"],
                       balance=balance, note=SIGN_MODEL_NOTE)


# ---------------------------------------------------------------------------
# diagnostics and output


def std_square_deviation(family: Family) -> dict:
    """Fitted 1/p coefficient of the degree-5 average at each p squared.

    Reports p * (mean - 1); the limiting size of this number is an open
    modeling question, so callers should treat it as descriptive.
    """
    out = {}
    for p in family.spec.primes:
        mean, _ = _mean_stderr(coefficient_values(family, p * p, "std"))
        out[p] = p * (mean - 1.0)
    return out


def write_family_csv(family: Family, fh) -> None:
    """Dump rows form_id,prime,a,b,epsilon; floats use repr round-trip."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["form_id", "prime", "a", "b", "epsilon"])
    primes = sorted(family.points)
    eps = family.epsilons
    for i in range(len(family)):
        for p in primes:
            a, b = family.points[p][i]
            writer.writerow([i, p, repr(float(a)), repr(float(b)),
                             int(eps[i])])
