"""Shared test helpers.

`brute_d_n` re-derives the n-level statistic by literal enumeration of
signed index tuples.  It is the oracle the vectorised implementation is
required to match bit for bit, so it deliberately shares nothing with
the production term-list construction.
"""

import itertools
import math
import random

from lowlying import rmt


def brute_d_n(spectrum, phis, include_zero):
    """Sum over signed index tuples with pairwise distinct magnitudes.

    Products are taken in slot order, so every individual term is the
    same float the production code folds into its term list.
    """
    points = {}
    for j, x in enumerate(spectrum.scaled, start=1):
        points[j] = x
        if spectrum.reflect:
            points[-j] = -x
    if include_zero and spectrum.forced_zero:
        points[0] = 0.0
    values = {
        idx: [rmt.periodized_value(phi, spectrum.period, x) for phi in phis]
        for idx, x in points.items()
    }
    n = len(phis)
    terms = []
    for combo in itertools.product(points, repeat=n):
        if len({abs(i) for i in combo}) != n:
            continue
        prod = 1.0
        for slot, idx in enumerate(combo):
            prod = prod * values[idx][slot]
        terms.append(prod)
    return math.fsum(terms)


def random_small_spectrum(rng: random.Random):
    """Synthetic folded spectrum with a handful of generic points."""
    group = rng.choice(["SOeven", "SOodd", "USp", "U"])
    m = rng.randrange(0, 6)
    period = rng.uniform(8.0, 40.0)
    xs = sorted(rng.uniform(0.05, 0.45 * period) for _ in range(m))
    scale = 2.0 * math.pi / period
    return rmt.ScaledSpectrum(
        angles=tuple(x * scale for x in xs),
        scaled=tuple(xs),
        forced_zero=group == "SOodd",
        period=period,
        group=group,
    )
