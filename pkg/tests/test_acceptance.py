"""Headline accuracy, stability, and runtime checks for the whole package.

Each test pins one reference table or qualitative claim end to end; the
tolerances are frozen here on purpose so regressions surface as failures,
not as silently looser bounds.
"""

import math
from fractions import Fraction
from time import perf_counter

import numpy as np
import pytest
from scipy.integrate import quad

from berngen.acceleration import G_approx, q0_shift
from berngen.arnoldi import arnoldi_extend, arnoldi_q_approx
from berngen.bernoulli import build_bernoulli_table
from berngen.bvp import circulant_shift, discretize_laplacian, geometric_grid
from berngen.cli import _COMMANDS, cmd_bvp_compare, cmd_delta_table
from berngen.fourier import (ApproxParams, delta_of_N, g_approx, reference_q,
                             residual_l2)
from berngen.matfunc import (ActionPlan, BandedOperator, G_action, g_action,
                             reference_solution)

TWO_PI = 2.0 * math.pi


def _cells(report, **match):
    rows = []
    for row in report.rows:
        if all(getattr(row, key) == val for key, val in match.items()):
            rows.append(row)
    return rows


def _one(report, **match):
    rows = _cells(report, **match)
    assert len(rows) == 1, f"expected one row for {match}, got {len(rows)}"
    return rows[0]


class TestResidualNormTable:
    def test_default_table_matches_reference_values(self):
        """The default sweep reproduces every reference cell within the
        expected quadrature noise, in under five seconds."""
        defaults = dict(_COMMANDS["delta-table"][2])
        t0 = perf_counter()
        report = cmd_delta_table(defaults)
        elapsed = perf_counter() - t0
        assert elapsed < 5.0
        reference = {512: 0.5327, 1024: 0.5328, 2048: 0.5319}
        assert len(report.rows) == 9
        for z in (1.0, 0.1, 10.0):
            for N, expect in reference.items():
                row = _one(report, z=z, N=N)
                assert abs(row.value - expect) <= 5e-3

    def test_asymptotic_constant(self):
        """N^{7/2} |z|^{-4} ||R||_2 approaches sqrt(2/7) for n = 1."""
        target = math.sqrt(2.0 / 7.0)
        got = delta_of_N(1.0, 4096, 16384)
        assert abs(got - target) / target <= 0.02

    def test_tail_norm_decay_rate(self):
        """log-log slope of the residual norm vs N equals -(p - 1/2)."""
        Ns = np.array([256, 512, 1024, 2048, 4096])
        for p in (2, 3, 4):
            vals = [residual_l2(p, TWO_PI, int(N), int(8 * N)) for N in Ns]
            slope = np.polyfit(np.log(Ns), np.log(vals), 1)[0]
            target = -(p - 0.5)
            assert abs(slope - target) <= 0.02 * abs(target)


class TestUniformGridErrorTable:
    def test_default_table(self):
        """Stabilized errors track the reference cells within 100x while
        the classical construction loses more than ten orders of
        magnitude."""
        defaults = dict(_COMMANDS["bvp-compare"][2])
        t0 = perf_counter()
        report = cmd_bvp_compare(defaults)
        elapsed = perf_counter() - t0
        assert elapsed < 60.0
        tau = 1.0 / 6.0
        bounds = {(100, 3): 100 * 4.8e-11, (200, 3): 100 * 6.0e-12,
                  (200, 4): 100 * 3.8e-12}
        for (N, ell), bound in bounds.items():
            row = _one(report, method="fastlanc", N=N, ell=ell, tau=tau)
            assert row.value <= bound
        unstable = _one(report, method="lanc", n=4, N=50, tau=1.0 / 12.0)
        assert unstable.value > 1e10


class TestGeometricGridErrorTable:
    def test_trimmed_table(self):
        config = dict(_COMMANDS["bvp-compare"][2])
        config.update({"grid": "geometric", "N": [50, 200], "n": [4],
                       "ell": [4]})
        report = cmd_bvp_compare(config)
        accurate = _one(report, method="fastlanc", N=200, ell=4,
                        tau=1.0 / 6.0)
        assert accurate.value <= 100 * 8.5e-11
        unstable = _one(report, method="lanc", n=4, N=50, tau=1.0 / 12.0)
        assert unstable.value >= 1e15


@pytest.fixture(scope="module")
def problem():
    A = discretize_laplacian(geometric_grid(0.01, 1.005, 512))
    f = np.ones(A.dimension)
    z = reference_solution(A, 1.0 / 6.0, f)
    return A, f, z


class TestStretchedOperatorAction:
    def test_accelerated_action_beats_arnoldi(self, problem):
        """The 60-solve accelerated plan reaches 1e-8 where 100 Krylov
        steps stay orders of magnitude away on the stiff spectrum."""
        A, f, z = problem
        plan = ActionPlan(A, 2, 50, 5, f)
        err = float(np.max(np.abs(plan.evaluate(1.0 / 6.0) - z)))
        assert err <= 1e-8
        dec = arnoldi_extend(A, f, 100)
        kry = float(np.max(np.abs(arnoldi_q_approx(dec, 1.0 / 6.0) - z)))
        assert kry > err


class TestClusteredSpectrumAction:
    def test_circulant_radius_1e8(self):
        """Eigenvalues within 1e-8 of the removable singularity are
        handled to near machine precision."""
        A = circulant_shift(512, 1e-8)
        f = np.ones(512)
        z = reference_solution(A, 1.0 / 6.0, f)
        plan = ActionPlan(A, 2, 50, 4, f)
        err = float(np.max(np.abs(plan.evaluate(1.0 / 6.0) - z)))
        assert err <= 1e-12


class TestStructuralProperties:
    def test_triangle_second_differences_are_exact(self):
        rng = np.random.default_rng(100)
        from berngen.acceleration import build_triangle
        base = rng.standard_normal(9)
        tri = build_triangle(base, 4)
        prev = base
        for j in range(1, 5):
            manual = -prev[:-2] + 2.0 * prev[1:-1] - prev[2:]
            assert np.array_equal(np.asarray(tri.levels[j]), manual)
            prev = manual

    def test_solve_count_is_N_plus_two_ell(self):
        A = discretize_laplacian(geometric_grid(0.01, 1.005, 24))
        f = np.ones(24)
        for N, ell in ((10, 0), (10, 3), (25, 5)):
            plan = ActionPlan(A, 2, N, ell, f)
            assert plan.solve_count == N + 2 * ell
            plan.evaluate(0.25)
            assert plan.solve_count == N + 2 * ell

    def test_zero_depth_equivalence(self):
        rng = np.random.default_rng(101)
        A = BandedOperator.tridiagonal(0.5 * rng.standard_normal(9),
                                       0.5 * rng.standard_normal(10),
                                       0.5 * rng.standard_normal(9))
        f = rng.standard_normal(10)
        for n in (0, 1, 2):
            params = ApproxParams(p=2 * n + 2, N=15, tau=0.3, ell=0)
            assert np.array_equal(G_action(A, params, f),
                                  g_action(A, params, f))

    def test_scalar_matrix_agreement(self):
        for a in (-3.0, -0.4, 1.2):
            A = BandedOperator.diagonal([a])
            params = ApproxParams(p=2, N=60, tau=0.3, w=a, ell=2)
            matrix = G_action(A, params, np.array([1.0]))[0]
            scalar = G_approx(params)
            assert abs(matrix - scalar) <= 1e-13 * max(1.0, abs(scalar))

    def test_q_jump_identity(self):
        for w in (1.0, -4.0, 0.2 + 1.5j):
            got = reference_q(1.0, w) - reference_q(0.0, w)
            assert abs(got - w) <= 1e-12 * max(1.0, abs(w))

    def test_q_unit_mean(self):
        for w in (1.0, -5.0):
            val, _ = quad(lambda t: reference_q(t, w).real, 0.0, 1.0,
                          epsabs=1e-14)
            assert abs(val - 1.0) <= 1e-10

    def test_q_shift_identity(self):
        """q(0, w) = q(1 - alpha, w) e^{alpha w} - w in closed form."""
        for w in (-1.0, -7.5, 2.0):
            for alpha in (0.125, 0.3):
                lhs = reference_q(0.0, w)
                rhs = reference_q(1.0 - alpha, w) * math.exp(
                    alpha * w) - w
                assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    def test_bernoulli_identities(self):
        table = build_bernoulli_table(16)
        for k in range(1, 17):
            derived = tuple(j * c for j, c in enumerate(table.coeffs[k]))[1:]
            scaled = tuple(Fraction(k) * c for c in table.coeffs[k - 1])
            assert derived == scaled
            assert sum(c / (j + 1)
                       for j, c in enumerate(table.coeffs[k])) == 0

    def test_arnoldi_relation_residual(self):
        A = discretize_laplacian(geometric_grid(0.01, 1.005, 64))
        rng = np.random.default_rng(102)
        f = rng.standard_normal(64)
        dec = arnoldi_extend(A, f, 25)
        AV = np.stack([A.matvec(dec.V[:, m]) for m in range(25)], axis=1)
        assert np.linalg.norm(AV - dec.V @ dec.H) <= 1e-12 * A.norm1()

    def test_full_dimension_arnoldi_equals_reference(self):
        from berngen.bvp import uniform_grid
        A = discretize_laplacian(uniform_grid(1.0, 32))
        f = np.ones(32)
        dec = arnoldi_extend(A, f, 32)
        got = arnoldi_q_approx(dec, 0.3)
        ref = reference_solution(A, 0.3, f)
        assert np.linalg.norm(got - ref) <= 1e-10 * np.linalg.norm(ref)


class TestScalarDominance:
    WS = np.linspace(-10.0, 0.0, 201)

    def _max_error(self, tau, ell):
        worst = 0.0
        for w in self.WS:
            w = float(w)
            exact = reference_q(tau, w)
            approx = G_approx(ApproxParams(p=2, N=100, tau=tau, w=w,
                                           ell=ell))
            worst = max(worst, abs(approx - exact) / abs(exact))
        return worst

    def test_error_drops_with_depth_at_interior_tau(self):
        errs = [self._max_error(0.125, ell) for ell in range(4)]
        for a, b in zip(errs, errs[1:]):
            assert b < a

    def test_near_endpoint_tau_is_uniformly_harder(self):
        for ell in range(4):
            assert self._max_error(2.0 ** -7, ell) >= self._max_error(
                2.0 ** -3, ell)

    def test_zero_tau_pipeline(self):
        """Shift-identity evaluation stays below 1e-6 relative error on
        w in [-10, 0], including the removable singularity itself."""
        for w in self.WS:
            w = float(w)
            exact = reference_q(0.0, w)
            params = ApproxParams(p=2, N=100, tau=0.5, w=w, ell=3,
                                  alpha=0.125)
            got = q0_shift(w, alpha=0.125, params=params)
            assert abs(got - exact) / abs(exact) <= 1e-6
