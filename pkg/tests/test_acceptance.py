"""Acceptance gate for the whole package.

Each criterion is a single test function, so `pytest -v` prints exactly
one pass/fail line per criterion.  Tolerances, sample sizes, and runtime
budgets are asserted inside the tests at their stated values; nothing is
loosened for convenience.
"""

import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import brute_d_n, random_small_spectrum
from lowlying import family, hecke, kernels, measures, paramodular, rmt


# ---------------------------------------------------------------------------
# 1. measure normalization


def test_criterion_1_measure_normalization():
    for p in (2, 3, 5, 11, 101):
        spec = measures.vertical_measure(p)
        t0 = time.perf_counter()
        mass = float(measures.integrate(
            spec, lambda x, y: np.ones_like(x), tol=1e-9))
        elapsed = time.perf_counter() - t0
        assert abs(mass - 1.0) < 1e-8, (p, mass)
        assert elapsed < 5.0, (p, elapsed)


# ---------------------------------------------------------------------------
# 2. coefficient moments against the exact main term


def test_criterion_2_moment_identities():
    t0 = time.perf_counter()
    for p in (2, 3, 5):
        spec = measures.vertical_measure(p)
        for n in range(1, 7):
            moment = float(measures.integrate(
                spec,
                lambda x, y, _n=n: hecke.spin_coeff_grid(x, y, _n)[_n],
                tol=1e-7))
            want = float(family.main_term_spin(p ** n))
            if n % 2:
                assert want == 0.0
                assert abs(moment) < 1e-6, (p, n, moment)
            else:
                assert abs(moment - want) < 1e-6, (p, n, moment, want)
    assert time.perf_counter() - t0 < 30.0


# ---------------------------------------------------------------------------
# 3. one-level closed forms for all five symmetry types


def test_criterion_3_one_level_closed_forms():
    beta = 0.9
    phi = kernels.fejer_test_function(beta)
    # transform value at 0 is 1, x-space value at 0 is beta; the closed
    # forms are 1 plus or minus half of beta, with the full extra beta
    # for the odd orthogonal delta term and the even/odd average for O
    closed = {
        "U": 1.0,
        "SOeven": 1.0 + beta / 2.0,
        "SOodd": 1.0 - beta / 2.0 + beta,
        "Sp": 1.0 - beta / 2.0,
    }
    closed["O"] = 0.5 * (closed["SOeven"] + closed["SOodd"])
    for G in kernels.ALL_TYPES:
        got = kernels.n_level_prediction(G, [phi])
        assert abs(got - closed[G.tag]) < 1e-8, (G.tag, got)


# ---------------------------------------------------------------------------
# 4. combinatorial expansion against determinant quadrature


def test_criterion_4_combinatorial_identity():
    cases = ((1, [0.9]), (2, [0.45, 0.4]), (3, [0.3, 0.28, 0.25]))
    for n, betas in cases:
        phis = [kernels.fejer_test_function(b) for b in betas]
        t0 = time.perf_counter()
        for sign, G in ((1, kernels.SOEVEN), (-1, kernels.SP)):
            combinatorial = kernels.rubinstein_rhs(sign, phis)
            determinant = kernels.n_level_prediction(G, phis)
            assert abs(combinatorial - determinant) < 1e-6, \
                (n, sign, combinatorial, determinant)
        if n == 3:
            assert time.perf_counter() - t0 < 120.0


# ---------------------------------------------------------------------------
# 5. matrix ensembles against kernel predictions


def test_criterion_5_rmt_agreement():
    t0 = time.perf_counter()
    phis_one = [kernels.fejer_test_function(0.9)]
    phis_two = [kernels.fejer_test_function(0.45)] * 2
    one_level = {}
    try:
        for group in rmt.GROUPS:
            spec = rmt.EnsembleSpec(group=group, size=30, samples=20000,
                                    seed=20260822)
            r1 = rmt.ensemble_average(spec, phis_one, True)
            assert abs(r1.z_score) < 3.0, (group, 1, r1.z_score)
            one_level[group] = r1
            r2 = rmt.ensemble_average(spec, phis_two, True)
            assert abs(r2.z_score) < 3.0, (group, 2, r2.z_score)
        # the odd orthogonal minus symplectic one-level difference is the
        # point mass at the center: value of the test function at 0
        odd, sp = one_level["SOodd"], one_level["USp"]
        diff = odd.mc_mean - sp.mc_mean
        sigma = math.hypot(odd.mc_stderr, sp.mc_stderr)
        assert abs(diff - 0.9) < 3.0 * sigma, (diff, sigma)
    finally:
        rmt.clear_spectrum_cache()
    assert time.perf_counter() - t0 < 600.0


# ---------------------------------------------------------------------------
# 6. synthetic family averages and joint moments


def test_criterion_6_family_simulator():
    t0 = time.perf_counter()
    spec = family.FamilySpec(primes=(2, 3, 5), forms=100000, seed=20260822)
    fam = family.generate_family(spec)
    for m in (1, 2, 4, 9, 12, 36):
        report = family.average_coefficient(fam, m)
        assert report.prediction == float(family.main_term_spin(m))
        assert abs(report.z_score) < 3.0, (m, report.z_score)
    joint = family.joint_sato_tate_test(fam, [2, 3], 2)
    assert joint.max_abs_z < 3.0
    assert time.perf_counter() - t0 < 120.0


# ---------------------------------------------------------------------------
# 7. oracle equivalences


def test_criterion_7_oracle_equivalences():
    rng = np.random.default_rng(20260822)
    pts = rng.uniform(-2.0, 2.0, size=(1000, 2))
    for a, b in pts:
        got = hecke.spin_dirichlet_coeff(hecke.SpinSatake.from_pair(a, b), 2)
        assert abs(got - (a * a + a * b + b * b - 2.0)) < 1e-10, (a, b)

    stat_rng = random.Random(20260822)
    for _ in range(200):
        spectrum = random_small_spectrum(stat_rng)
        n = stat_rng.choice([1, 1, 2, 2, 2, 3])
        phis = [kernels.fejer_test_function(
                    stat_rng.choice([0.3, 0.45, 0.6, 0.9]))
                for _ in range(n)]
        include = stat_rng.random() < 0.5
        got = rmt.d_n_statistic(spectrum, phis, include)
        assert got == brute_d_n(spectrum, phis, include)


# ---------------------------------------------------------------------------
# 8. exact arithmetic


def test_criterion_8_exact_arithmetic():
    lvl1 = paramodular.LevelData.from_level(1)
    lvl2 = paramodular.LevelData.from_level(2)
    lvl6 = paramodular.LevelData.from_level(6)

    assert paramodular.dim_main_term(4, 4, lvl1) == Fraction(1, 576)
    assert paramodular.dim_main_term(4, 4, lvl2) == Fraction(5, 576)
    assert paramodular.dim_main_term(4, 4, lvl6) == Fraction(1, 576) * 50
    assert paramodular.dim_newform_main_term(4, 4, lvl1) == Fraction(1, 1152)
    assert paramodular.dim_newform_main_term(4, 4, lvl2) == Fraction(1, 384)

    constant_table = {d: Fraction(1) for d in lvl6.divisors()}
    assert paramodular.newform_trace(constant_table, lvl6) == 1

    plain, twisted = Fraction(7, 3), Fraction(1, 2)
    plus, minus = paramodular.pm_trace_split(plain, twisted, 10)
    assert plus + minus == plain
    assert plus - minus == twisted
    flipped = paramodular.pm_trace_split(plain, twisted, 11)
    assert flipped == (minus, plus)
    even_split = paramodular.pm_trace_split(plain, Fraction(0), 11)
    assert even_split == (plain / 2, plain / 2)

    assert hecke.spin_root_number_level_one(10) == 1
    assert hecke.spin_root_number_level_one(11) == -1
    for k2 in range(3, 12):
        assert hecke.spin_root_number_level_one(k2 + 1) == \
            -hecke.spin_root_number_level_one(k2)
    assert hecke.std_root_number() == 1

    assert hecke.analytic_conductor(hecke.FormShape(10, 10, 1)) == 400
    assert hecke.analytic_conductor(hecke.FormShape(12, 10, 1)) == 4356
    assert hecke.analytic_conductor(hecke.FormShape(12, 10, 7)) == 7 * 4356


# ---------------------------------------------------------------------------
# 9. byte-identical reruns across thread environments


def _run_cli(args, threads, cwd):
    env = dict(os.environ)
    env["OPENBLAS_NUM_THREADS"] = threads
    env["OMP_NUM_THREADS"] = threads
    proc = subprocess.run([sys.executable, "-m", "lowlying"] + args,
                          cwd=cwd, env=env, capture_output=True, text=True)
    assert proc.returncode == 0, (args, proc.stderr)


def test_criterion_9_reproducibility(tmp_path):
    commands = {
        "density": ["density", "--p", "3", "--grid", "5",
                    "--out", "d.csv"],
        "moments": ["moments", "--primes", "2", "--nmax", "2",
                    "--out", "m.json"],
        "rmt": ["rmt", "--group", "USp", "--size", "6", "--samples", "60",
                "--seed", "5", "--zmax", "50", "--out", "r.json"],
        "family": ["family", "--primes", "2,3", "--forms", "300",
                   "--seed", "9", "--m", "1,4", "--zmax", "50",
                   "--csv", "f.csv", "--out", "f.json"],
        "dims": ["dims", "--weights", "4,4;5,4", "--levels", "1,2",
                 "--out", "t.csv"],
    }
    outputs = {
        "density": ["d.csv", "d.csv.json"],
        "moments": ["m.json"],
        "rmt": ["r.json"],
        "family": ["f.csv", "f.json"],
        "dims": ["t.csv", "t.csv.json"],
    }
    for name, args in commands.items():
        _run_cli(args, "1", str(tmp_path))
        first = {path: (tmp_path / path).read_bytes()
                 for path in outputs[name]}
        _run_cli(args, "8", str(tmp_path))
        for path, data in first.items():
            assert (tmp_path / path).read_bytes() == data, (name, path)
