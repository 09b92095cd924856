"""Density kernels, their determinant integrals, and the combinatorial
expansion of n-level sums.

Two independent evaluation routes are kept deliberately separate:

* the determinant route integrates test functions against determinants
  of the sine-plus-reflection kernel in x-space (panel quadrature on a
  large box, plus exact trigonometric tail integrals of the closed-form
  test function);
* the combinatorial route works entirely on the Fourier side (grid
  convolutions of the compactly supported transforms, pairing sums).

Their agreement is a theorem, and the test suite checks it numerically;
neither route borrows intermediate results from the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import sici

from .quadrature import panel_grid

__all__ = [
    "TestFunction",
    "SymmetryType",
    "PartitionStructure",
    "SupportViolation",
    "kernel_eval",
    "density_W",
    "n_level_prediction",
    "prediction_with_error",
    "enumerate_partitions",
    "enumerate_pairings",
    "rubinstein_rhs",
    "rubinstein_with_error",
    "fejer_test_function",
    "default_betas",
]


class SupportViolation(ValueError):
    """A Fourier support exceeds the admissible window."""


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """Even test function given by a piecewise-polynomial Fourier transform.

    `pieces` lists (lo, hi, coeffs) on [0, beta]; coeffs are polynomial
    coefficients in u, lowest degree first.  Negative u is the mirror
    image, values outside [-beta, beta] are zero.  The x-space function
    is recovered exactly from this data, both pointwise and as a finite
    sum of trigonometric terms valid for every x > 0.
    """

    beta: float
    pieces: tuple
    name: str = ""

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        hi = 0.0
        for lo, piece_hi, coeffs in self.pieces:
            if not (abs(lo - hi) < 1e-12 and piece_hi > lo and len(coeffs) >= 1):
                raise ValueError("pieces must tile [0, beta] in order")
            hi = piece_hi
        if abs(hi - self.beta) > 1e-12:
            raise ValueError("pieces must end at beta")

    # -- Fourier side -------------------------------------------------

    def fourier(self, u):
        """Transform value(s) at u; even, zero outside [-beta, beta]."""
        ua = np.abs(np.asarray(u, dtype=float))
        out = np.zeros_like(ua)
        for lo, hi, coeffs in self.pieces:
            mask = (ua >= lo - 1e-15) & (ua <= hi + 1e-15) & (out == 0.0)
            if np.any(mask):
                v = np.zeros(np.count_nonzero(mask))
                uu = ua[mask]
                for c in reversed(coeffs):
                    v = v * uu + c
                out[mask] = v
        if np.isscalar(u):
            return float(out)
        return out

    @property
    def fourier_at_zero(self) -> float:
        v = 0.0
        for c in reversed(self.pieces[0][2]):
            v = v * 0.0 + c
        return float(v)

    @property
    def value_at_zero(self) -> float:
        """phi(0) = integral of the transform (exact piecewise integration)."""
        total = 0.0
        for lo, hi, coeffs in self.pieces:
            for m, c in enumerate(coeffs):
                total += c * (hi ** (m + 1) - lo ** (m + 1)) / (m + 1)
        return 2.0 * total

    # -- x side -------------------------------------------------------

    def value(self, x):
        """phi(x) = 2 * sum over pieces of int P(u) cos(2 pi x u) du."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        omega = 2.0 * math.pi * np.abs(xs)
        total = np.zeros_like(omega)
        for lo, hi, coeffs in self.pieces:
            total += _piece_cos_integral(lo, hi, coeffs, omega)
        total *= 2.0
        if np.isscalar(x):
            return float(total[0])
        return total.reshape(np.shape(x))

    def tail_terms(self):
        """Exact trig representation phi(x) = Re sum c e^{i w x} / x^d, x > 0.

        Derived from the jumps of the transform's derivatives at its
        breakpoints; finite because the transform is piecewise
        polynomial.  Returns a TrigSum.
        """
        return _tail_sum(self)


def _piece_cos_integral(lo, hi, coeffs, omega):
    """Vectorized int_lo^hi P(u) cos(omega u) du for each omega >= 0."""
    out = np.empty_like(omega)
    small = omega * (hi - lo) < 0.5
    if np.any(small):
        # short phase: plain Gauss-Legendre is exact to machine here
        g, w = np.polynomial.legendre.leggauss(12)
        u = 0.5 * (hi - lo) * (g + 1.0) + lo
        pv = np.zeros_like(u)
        for c in reversed(coeffs):
            pv = pv * u + c
        om = omega[small]
        out[small] = 0.5 * (hi - lo) * np.sum(
            (w * pv)[None, :] * np.cos(om[:, None] * u[None, :]), axis=1)
    big = ~small
    if np.any(big):
        om = omega[big]
        # A_m = int u^m cos, B_m = int u^m sin, by integration by parts
        a_prev = b_prev = None
        acc = np.zeros_like(om)
        sin_hi, cos_hi = np.sin(om * hi), np.cos(om * hi)
        sin_lo, cos_lo = np.sin(om * lo), np.cos(om * lo)
        for m in range(len(coeffs)):
            if m == 0:
                a_m = (sin_hi - sin_lo) / om
                b_m = (cos_lo - cos_hi) / om
            else:
                a_m = (hi ** m * sin_hi - lo ** m * sin_lo) / om \
                    - (m / om) * b_prev
                b_m = (lo ** m * cos_lo - hi ** m * cos_hi) / om \
                    + (m / om) * a_prev
            acc += coeffs[m] * a_m
            a_prev, b_prev = a_m, b_m
        out[big] = acc
    return out


class TrigSum:
    """Finite sum f(x) = Re sum_j c_j e^{i w_j x} x^{-d_j}.

    Closed under products; integrable term by term on [T, infinity) via
    sine/cosine integrals.  Terms are kept in a dict keyed by the
    (frequency, power) pair, built in deterministic order.
    """

    def __init__(self, terms=None):
        self.terms = dict(terms or {})

    def _key(self, omega, d):
        return (round(omega, 12), d)

    def add(self, omega, d, c):
        k = self._key(omega, d)
        self.terms[k] = self.terms.get(k, 0.0 + 0.0j) + c

    def __mul__(self, other):
        out = TrigSum()
        for (w1, d1), c1 in self.terms.items():
            for (w2, d2), c2 in other.terms.items():
                out.add(w1 + w2, d1 + d2, c1 * c2)
        return out

    def scaled(self, factor):
        return TrigSum({k: c * factor for k, c in self.terms.items()})

    def plus(self, other):
        out = TrigSum(self.terms)
        for (w, d), c in other.terms.items():
            out.add(w, d, c)
        return out

    def eval(self, x):
        xs = np.asarray(x, dtype=float)
        acc = np.zeros_like(xs, dtype=complex)
        for (w, d), c in sorted(self.terms.items()):
            acc += c * np.exp(1j * w * xs) / xs ** d
        return acc.real

    def integral_from(self, T):
        """Real value of int_T^inf f(x) dx (exact up to special functions)."""
        total = 0.0 + 0.0j
        for (w, d), c in sorted(self.terms.items()):
            total += c * _e_integral(w, d, T)
        if abs(total.imag) > 1e-10 * (1.0 + abs(total.real)):
            raise ArithmeticError("tail integral has a non-real residue")
        return total.real


def _e_integral(omega, d, T):
    """int_T^inf e^{i omega x} x^{-d} dx for d >= 1 (d >= 2 when omega=0)."""
    if omega == 0.0:
        if d < 2:
            raise ArithmeticError("divergent tail term (omega=0, d=1)")
        return (T ** (1 - d)) / (d - 1) + 0.0j
    if d == 1:
        z = abs(omega) * T
        si, ci = sici(z)
        val = -ci + 1j * (math.pi / 2.0 - si)
        return val if omega > 0 else np.conj(val)
    lower = _e_integral(omega, d - 1, T)
    return (np.exp(1j * omega * T) * T ** (1 - d)
            + 1j * omega * lower) / (d - 1)


def _tail_sum(tf: TestFunction) -> TrigSum:
    # full even extension piece list: (lo, hi, coeffs) over [-beta, beta]
    pieces = []
    for lo, hi, coeffs in tf.pieces:
        mirrored = tuple(c * (-1.0) ** m for m, c in enumerate(coeffs))
        pieces.append((-hi, -lo, mirrored))
    pieces.sort()
    pieces.extend(tf.pieces)

    max_deg = max(len(c) for _, _, c in pieces) - 1

    def deriv_at(coeffs, order, u):
        total = 0.0
        for m, c in enumerate(coeffs):
            if m >= order:
                fall = 1.0
                for j in range(order):
                    fall *= (m - j)
                total += c * fall * u ** (m - order)
        return total

    breakpoints = sorted({round(p[0], 12) for p in pieces}
                         | {round(p[1], 12) for p in pieces})
    out = TrigSum()
    for ell in range(1, max_deg + 2):
        order = ell - 1
        for bp in breakpoints:
            right = left = 0.0
            for lo, hi, coeffs in pieces:
                if abs(lo - bp) < 1e-12:
                    right = deriv_at(coeffs, order, bp)
                if abs(hi - bp) < 1e-12:
                    left = deriv_at(coeffs, order, bp)
            jump = right - left
            if jump != 0.0:
                c = (1j ** ell) * jump / (2.0 * math.pi) ** ell
                out.add(2.0 * math.pi * bp, ell, c)
    return out


_SINC2X = TrigSum({(2.0 * math.pi, 1): -0.25j / math.pi,
                   (-2.0 * math.pi, 1): 0.25j / math.pi})


def fejer_test_function(beta: float) -> TestFunction:
    """Triangle transform max(0, 1-|u|/beta); x-space value beta*sinc^2."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return TestFunction(beta=float(beta),
                        pieces=((0.0, float(beta), (1.0, -1.0 / float(beta))),),
                        name="fejer(%g)" % beta)


def default_betas(n: int) -> float:
    """Default per-function Fourier half-width for n-level inputs."""
    return 0.9 / n


# ---------------------------------------------------------------------------
# kernels and determinants


def kernel_eval(epsilon, x, y):
    """Sine kernel plus epsilon times its reflection; sinc(0) = 1."""
    if epsilon not in (-1, 0, 1):
        raise ValueError("epsilon must be -1, 0, or +1")
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    v = np.sinc(xa - ya) + (epsilon * np.sinc(xa + ya) if epsilon else 0.0)
    if np.isscalar(x) and np.isscalar(y):
        return float(v)
    return v


@dataclass(frozen=True)
class SymmetryType:
    """One of the five symmetry classes."""

    tag: str

    _EPS = {"U": 0, "SOeven": 1, "SOodd": -1, "Sp": -1, "O": None}

    def __post_init__(self):
        if self.tag not in self._EPS:
            raise ValueError("unknown symmetry tag %r" % (self.tag,))

    @property
    def epsilon(self):
        return self._EPS[self.tag]

    @property
    def has_delta(self) -> bool:
        return self.tag == "SOodd"


U = SymmetryType("U")
SOEVEN = SymmetryType("SOeven")
SOODD = SymmetryType("SOodd")
O_TYPE = SymmetryType("O")
SP = SymmetryType("Sp")
ALL_TYPES = (U, SOEVEN, SOODD, O_TYPE, SP)


def density_W(G: SymmetryType, xs):
    """Continuous part of the n-level density at the points xs.

    Delta contributions of the odd orthogonal class are handled in
    n_level_prediction, never here.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size < 1:
        raise ValueError("need at least one coordinate")

    def det_for(eps):
        m = kernel_eval(eps, xs[:, None], xs[None, :])
        return float(np.linalg.det(np.atleast_2d(m)))

    if G.tag == "O":
        return 0.5 * (det_for(1) + det_for(-1))
    return det_for(G.epsilon)


# ---------------------------------------------------------------------------
# determinant-route predictions via cycle integrals

_J_CACHE: dict = {}

_CORE_HALF_WIDTH = 24.0
_BOX2 = (100.0, 12)  # half-width and per-unit order for the double integral
_BOX3 = (56.0, 12)   # same for the triple integral


def _j1(phi: TestFunction, eps: int):
    """int phi(x) K_eps(x,x) dx with exact trigonometric tails."""
    key = ("j1", phi, eps)
    if key in _J_CACHE:
        return _J_CACHE[key]
    a = _CORE_HALF_WIDTH
    nodes, weights = panel_grid(0.0, a, int(2 * a), 16)
    vals = phi.value(nodes) * (1.0 + eps * np.sinc(2.0 * nodes))
    core = math.fsum((weights * vals).tolist())
    tail_sum = phi.tail_terms()
    if eps:
        tail_sum = tail_sum.plus((phi.tail_terms() * _SINC2X).scaled(eps))
    tail = tail_sum.integral_from(a)
    value = 2.0 * (core + tail)
    result = (value, 1e-13 * (1.0 + abs(value)))
    _J_CACHE[key] = result
    return result


def _grid_weights(phis, half_width, order):
    nodes, weights = panel_grid(-half_width, half_width,
                                int(2 * half_width), order)
    return nodes, [weights * phi.value(nodes) for phi in phis]


def _kmat(nodes, eps):
    k = np.sinc(nodes[:, None] - nodes[None, :])
    if eps:
        k = k + eps * np.sinc(nodes[:, None] + nodes[None, :])
    return k


def _j2_value(phi_a, phi_b, eps, half_width, order):
    nodes, (wa, wb) = _grid_weights((phi_a, phi_b), half_width, order)
    k = _kmat(nodes, eps)
    inner = np.sum(k * k * wb[None, :], axis=1)
    return math.fsum((wa * inner).tolist())


def _j2(phi_a, phi_b, eps):
    """double integral of phi_a phi_b K^2 over the plane (box quadrature)."""
    key = ("j2", phi_a, phi_b, eps)
    if key in _J_CACHE:
        return _J_CACHE[key]
    t, order = _BOX2
    value = _j2_value(phi_a, phi_b, eps, t, order)
    err = abs(value - _j2_value(phi_a, phi_b, eps, t, order - 2)) \
        + abs(value - _j2_value(phi_a, phi_b, eps, 0.8 * t, order))
    result = (value, err)
    _J_CACHE[key] = result
    return result


def _j3_value(phis, eps, half_width, order, zchunk=8):
    nodes, (w1, w2, w3) = _grid_weights(phis, half_width, order)
    k = _kmat(nodes, eps)
    n = nodes.size
    p = k * w1[:, None]
    # G[y, z] = sum_x w1[x] K[x,y] K[x,z]; chunked elementwise reduction
    # keeps the result independent of BLAS threading
    g = np.empty((n, n))
    for z0 in range(0, n, zchunk):
        z1 = min(z0 + zchunk, n)
        g[:, z0:z1] = np.sum(p[:, :, None] * k[:, None, z0:z1], axis=0)
    inner = np.sum(g * k * w3[None, :], axis=1)
    return math.fsum((w2 * inner).tolist())


def _j3(phis, eps):
    """triple integral of phi1 phi2 phi3 K(x,y)K(y,z)K(z,x)."""
    key = ("j3", tuple(phis), eps)
    if key in _J_CACHE:
        return _J_CACHE[key]
    t, order = _BOX3
    value = _j3_value(phis, eps, t, order)
    err = abs(value - _j3_value(phis, eps, 0.8 * t, order))
    result = (value, err)
    _J_CACHE[key] = result
    return result


def _continuous_prediction(eps, phis):
    """int prod phi_i  det(K_eps) over R^n for n <= 3, via cycle integrals."""
    n = len(phis)
    if n == 1:
        return _j1(phis[0], eps)
    if n == 2:
        j1a, e1a = _j1(phis[0], eps)
        j1b, e1b = _j1(phis[1], eps)
        j2, e2 = _j2(phis[0], phis[1], eps)
        value = j1a * j1b - j2
        err = abs(j1b) * e1a + abs(j1a) * e1b + e2
        return value, err
    if n == 3:
        j1 = [_j1(p, eps) for p in phis]
        pairs = [(1, 2), (0, 2), (0, 1)]
        j2 = [_j2(phis[i], phis[j], eps) for i, j in pairs]
        j3, e3 = _j3(tuple(phis), eps)
        value = j1[0][0] * j1[1][0] * j1[2][0]
        err = 3.0 * max(e[1] for e in j1) * max(1.0, max(abs(e[0]) for e in j1)) ** 2
        for fix, (i, j) in enumerate(pairs):
            value -= j1[fix][0] * j2[fix][0]
            err += abs(j1[fix][0]) * j2[fix][1] + j1[fix][1] * abs(j2[fix][0])
        value += 2.0 * j3
        err += 2.0 * e3
        return value, err
    raise NotImplementedError(
        "determinant-route predictions are implemented for n <= 3")


def _check_supports(phis, beta_n):
    for i, phi in enumerate(phis):
        if phi.beta > beta_n + 1e-12:
            raise SupportViolation(
                "input %d has Fourier support %g, exceeding the allowed %g"
                % (i, phi.beta, beta_n))


def prediction_with_error(G: SymmetryType, phis, beta_n=None):
    """n-level prediction and its quadrature error estimate."""
    phis = list(phis)
    n = len(phis)
    if n < 1:
        raise ValueError("need at least one test function")
    if beta_n is None:
        beta_n = default_betas(n)
    _check_supports(phis, beta_n)
    if G.tag == "U":
        return _continuous_prediction(0, phis)
    if G.tag == "SOeven":
        return _continuous_prediction(1, phis)
    if G.tag == "Sp":
        return _continuous_prediction(-1, phis)
    if G.tag == "SOodd":
        value, err = _continuous_prediction(-1, phis)
        for nu in range(n):
            rest = phis[:nu] + phis[nu + 1:]
            if rest:
                sub, sub_err = _continuous_prediction(-1, rest)
            else:
                sub, sub_err = 1.0, 0.0
            value += phis[nu].value_at_zero * sub
            err += abs(phis[nu].value_at_zero) * sub_err
        return value, err
    if G.tag == "O":
        ve, ee = prediction_with_error(SOEVEN, phis, beta_n)
        vo, eo = prediction_with_error(SOODD, phis, beta_n)
        return 0.5 * (ve + vo), 0.5 * (ee + eo)
    raise ValueError("unknown symmetry type %r" % (G.tag,))


def n_level_prediction(G: SymmetryType, phis, beta_n=None) -> float:
    """Integral of the product test function against the n-level density,
    delta contributions included for the odd orthogonal class."""
    return prediction_with_error(G, phis, beta_n)[0]


# ---------------------------------------------------------------------------
# partitions, pairings, and the combinatorial route


@dataclass(frozen=True)
class PartitionStructure:
    """A set partition of {1..n} with blocks ordered by least element."""

    n: int
    blocks: tuple

    def __post_init__(self):
        seen = set()
        for b in self.blocks:
            if not b:
                raise ValueError("empty block")
            if seen & set(b):
                raise ValueError("blocks must be disjoint")
            seen |= set(b)
        if seen != set(range(1, self.n + 1)):
            raise ValueError("blocks must cover {1..n}")

    @property
    def nu(self) -> int:
        return len(self.blocks)


def enumerate_partitions(n: int):
    """All set partitions of {1..n}, blocks sorted by least element."""
    if not 1 <= n <= 8:
        raise ValueError("n must be in 1..8")
    out = []

    def grow(i, blocks):
        if i > n:
            out.append(PartitionStructure(
                n, tuple(tuple(b) for b in blocks)))
            return
        for b in blocks:
            b.append(i)
            grow(i + 1, blocks)
            b.pop()
        blocks.append([i])
        grow(i + 1, blocks)
        blocks.pop()

    grow(1, [])
    return out


def enumerate_pairings(items):
    """All perfect matchings of the given even-sized collection."""
    items = list(items)
    if len(items) % 2:
        raise ValueError("cannot pair an odd number of items")
    if not items:
        return [()]
    out = []
    first, rest = items[0], items[1:]
    for i, partner in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for sub in enumerate_pairings(remaining):
            out.append(((first, partner),) + sub)
    return out


def _even_subsets(k):
    out = []
    for mask in range(1 << k):
        idx = [i for i in range(k) if mask >> i & 1]
        if len(idx) % 2 == 0:
            out.append(tuple(idx))
    return out


def _aligned_step(betas, step):
    # kinks must land on grid nodes or the trapezoid error loses its
    # clean h^2 expansion (needed for Richardson)
    h = step
    for b in betas:
        ratio = b / h
        if abs(ratio - round(ratio)) > 1e-9:
            m = math.ceil(b / step)
            h = min(h, b / m)
    for b in betas:
        ratio = b / h
        if abs(ratio - round(ratio)) > 1e-6:
            raise SupportViolation(
                "cannot align Fourier supports %s on a common grid" % (betas,))
    return h


def _halved_ends(v):
    v = v.copy()
    v[0] *= 0.5
    v[-1] *= 0.5
    return v


def _block_grid(phis_in_block, h):
    """Convolution of the block's transforms sampled on a step-h grid.

    Returns (values, half_index): values[j] is the true convolution value
    at u = (j - half_index)*h.  Trapezoid endpoint halving is applied to
    convolution operands only, never to the stored samples.
    """
    acc = None
    for phi in phis_in_block:
        m = int(round(phi.beta / h))
        v = phi.fourier(np.arange(-m, m + 1) * h)
        if acc is None:
            acc = v
        else:
            acc = np.convolve(_halved_ends(acc), _halved_ends(v)) * h
    return acc, (acc.size - 1) // 2


def _pair_integral(ga, gb, h):
    """int |u| A(u) B(u) du for two centered grids with the same step."""
    (va, ca), (vb, cb) = ga, gb
    m = min(ca, cb)
    a = va[ca - m: ca + m + 1]
    b = vb[cb - m: cb + m + 1]
    w = np.abs(np.arange(-m, m + 1)) * h
    return h * float(np.sum(_halved_ends(a * b * w)))


def _rubinstein_eval(sign, phis, h):
    n = len(phis)
    partitions = enumerate_partitions(n)
    block_cache = {}

    def block_data(block):
        key = tuple(sorted(block))
        if key not in block_cache:
            fns = [phis[i - 1] for i in key]
            if len(fns) == 1:
                hat0 = fns[0].fourier_at_zero
                grid = _block_grid(fns, h)
            else:
                grid = _block_grid(fns, h)
                hat0 = float(grid[0][grid[1]])
            phi0 = 1.0
            for f in fns:
                phi0 *= f.value_at_zero
            block_cache[key] = (grid, hat0, phi0)
        return block_cache[key]

    pair_cache = {}

    def pair_integral(block_a, block_b):
        key = (tuple(sorted(block_a)), tuple(sorted(block_b)))
        key = tuple(sorted(key))
        if key not in pair_cache:
            ga = block_data(key[0])[0]
            gb = block_data(key[1])[0]
            pair_cache[key] = _pair_integral(ga, gb, h)
        return pair_cache[key]

    partition_terms = []
    for part in partitions:
        blocks = part.blocks
        prefactor = (-2.0) ** (n - part.nu)
        for b in blocks:
            prefactor *= math.factorial(len(b) - 1)
        subset_terms = []
        for subset in _even_subsets(len(blocks)):
            chosen = set(subset)
            factor = 1.0
            for li, b in enumerate(blocks):
                if li not in chosen:
                    _, hat0, phi0 = block_data(b)
                    factor *= hat0 + sign * 0.5 * phi0
            pairing_terms = []
            for pairing in enumerate_pairings(list(subset)):
                val = 2.0 ** (len(subset) // 2)
                for a_idx, b_idx in pairing:
                    val *= pair_integral(blocks[a_idx], blocks[b_idx])
                pairing_terms.append(val)
            pair_sum = math.fsum(pairing_terms) if pairing_terms else 0.0
            if not subset:
                pair_sum = 1.0
            subset_terms.append(factor * pair_sum)
        partition_terms.append(prefactor * math.fsum(subset_terms))
    return math.fsum(partition_terms)


def rubinstein_with_error(sign, phis, grid_step=1e-3, beta_n=None):
    """Combinatorial expansion value with a Richardson error estimate."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    phis = list(phis)
    n = len(phis)
    if not 1 <= n <= 8:
        raise ValueError("need 1..8 test functions")
    if beta_n is None:
        beta_n = default_betas(n)
    _check_supports(phis, beta_n)
    if math.fsum(p.beta for p in phis) >= 1.0 - 1e-9:
        raise SupportViolation(
            "total Fourier support %.6f reaches the working window [-1,1]"
            % math.fsum(p.beta for p in phis))
    h = _aligned_step([p.beta for p in phis], grid_step)
    coarse = _rubinstein_eval(sign, phis, h)
    fine = _rubinstein_eval(sign, phis, h / 2.0)
    value = (4.0 * fine - coarse) / 3.0
    return value, abs(value - fine) + 1e-12


def rubinstein_rhs(sign, phis, grid_step=1e-3, beta_n=None) -> float:
    """Sum over set partitions, even block subsets, and pairings."""
    return rubinstein_with_error(sign, phis, grid_step, beta_n)[0]
