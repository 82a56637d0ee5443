import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy import optimize, special

from conftest import mean_zero_dists, random_mean_zero, random_symmetric
from zbconc import bounds, oracle
from zbconc import permstat as ps
from zbconc import zerobias as zb
from zbconc.errors import DomainError, ResourceError
from zbconc.permstat import ConstantOnCycleType, CycleType, FpfInvolution, SquareMatrix, UniformSn
from zbconc.zerobias import DiscreteDist


def brute_tail(A, t):
    ys = [sum(A.entries[i, p[i]] for i in range(A.n)) for p in itertools.permutations(range(A.n))]
    mu = np.mean(ys)
    return np.mean([y - mu >= t - 1e-9 for y in ys])


class TestExact:
    def test_A3_tail(self, A3):
        est = oracle.exact_tail(A3, UniformSn(3), 3)
        assert est.point == pytest.approx(1 / 6, abs=1e-15)
        assert est.ci_low == est.ci_high == est.point
        assert est.trials == 6 and est.method == "exact"

    def test_extremes(self, A3):
        assert oracle.exact_tail(A3, UniformSn(3), -1e9).point == 1.0
        lo, hi = oracle.exact_support(A3, UniformSn(3))
        assert (lo, hi) == (-3.0, 3.0)
        assert oracle.exact_tail(A3, UniformSn(3), hi + 1e-6).point == 0.0

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_brute_force(self, seed):
        A = SquareMatrix(np.random.default_rng(seed).integers(0, 4, (5, 5)))
        for t in (-2.0, 0.0, 0.5, 1.0, 2.0, 3.5):
            assert oracle.exact_tail(A, UniformSn(5), t).point == pytest.approx(brute_tail(A, t), abs=1e-15)

    def test_mixture_weighting(self):
        A = random_symmetric(np.random.default_rng(0), 6)
        inv, cyc = CycleType.involution(6), CycleType.long_cycle(6)
        mix = ConstantOnCycleType({inv: 0.2, cyc: 0.8})
        # class tails are taken about the shared mean, identical for every f_1 = 0 class
        for t in (0.0, 0.3, 1.0):
            want = 0.2 * oracle.exact_tail(A, ps.UniformCycleType(inv), t).point + \
                0.8 * oracle.exact_tail(A, ps.UniformCycleType(cyc), t).point
            assert oracle.exact_tail(A, mix, t).point == pytest.approx(want, abs=1e-15)

    def test_moments(self, A3):
        assert oracle.exact_moments(A3, UniformSn(3)) == pytest.approx((3, 3), abs=1e-14)
        a = np.ones((4, 4))
        np.fill_diagonal(a, 0)
        assert oracle.exact_moments(SquareMatrix(a), FpfInvolution(4)) == pytest.approx((4, 0), abs=1e-14)

    @pytest.mark.parametrize("seed", range(3))
    def test_moments_match_formulas(self, seed):
        A = random_symmetric(np.random.default_rng(seed), 6)
        assert oracle.exact_moments(A, FpfInvolution(6)) == pytest.approx(
            ps.law_moments(A, FpfInvolution(6)), rel=1e-9)

    def test_cap(self):
        with pytest.raises(ResourceError):
            oracle.exact_tail(SquareMatrix(np.eye(10)), UniformSn(10), 0.0)

    def test_deterministic(self):
        A = SquareMatrix(np.random.default_rng(1).random((6, 6)))
        a = oracle.exact_tails(A, UniformSn(6), np.linspace(0, 2, 9))
        b = oracle.exact_tails(A, UniformSn(6), np.linspace(0, 2, 9))
        assert a == b


class TestMonteCarlo:
    def test_clopper_pearson_edges(self):
        assert oracle.clopper_pearson(0, 1) == (0.0, pytest.approx(0.9995, abs=1e-12))
        low, high = oracle.clopper_pearson(1, 1)
        assert low == pytest.approx(0.0005, abs=1e-12) and high == 1.0

    def test_trials_one(self, A3):
        est = oracle.mc_tail(A3, UniformSn(3), 3, trials=1, seed=0)
        assert est.point in (0.0, 1.0)
        if est.point == 0.0:
            assert (est.ci_low, est.ci_high) == (0.0, pytest.approx(0.9995, abs=1e-12))

    def test_coverage(self):
        A = SquareMatrix(np.random.default_rng(11).random((5, 5)))
        law = UniformSn(5)
        t = 0.4
        exact = oracle.exact_tail(A, law, t).point
        assert 0.05 < exact < 0.5
        hits = 0
        for rep in range(200):
            est = oracle.mc_tail(A, law, t, trials=2000, seed=rep)
            hits += abs(est.point - exact) <= est.half_width
        assert hits >= 198

    def test_width_scaling(self):
        A = SquareMatrix(np.random.default_rng(12).random((5, 5)))
        w1 = np.mean([oracle.mc_tail(A, UniformSn(5), 0.3, 4000, s).ci_high
                      - oracle.mc_tail(A, UniformSn(5), 0.3, 4000, s).ci_low for s in range(20)])
        w2 = np.mean([oracle.mc_tail(A, UniformSn(5), 0.3, 8000, s).ci_high
                      - oracle.mc_tail(A, UniformSn(5), 0.3, 8000, s).ci_low for s in range(20)])
        assert w2 / w1 == pytest.approx(1 / math.sqrt(2), rel=0.05)

    def test_worker_independence(self):
        A = random_symmetric(np.random.default_rng(3), 8)
        ts = [0.0, 0.5, 1.0]
        one = oracle.mc_tails(A, FpfInvolution(8), ts, 5000, seed=42, workers=1, chunk=700)
        four = oracle.mc_tails(A, FpfInvolution(8), ts, 5000, seed=42, workers=4, chunk=700)
        assert one == four

    def test_seed_changes_result(self):
        A = SquareMatrix(np.random.default_rng(4).random((7, 7)))
        a = oracle.mc_tail(A, UniformSn(7), 0.2, 3000, seed=1)
        b = oracle.mc_tail(A, UniformSn(7), 0.2, 3000, seed=2)
        assert a != b

    def test_bad_trials(self, A3):
        with pytest.raises(DomainError):
            oracle.mc_tail(A3, UniformSn(3), 1.0, 0, 0)


def chernoff_reference(d, t):
    def f(s):
        return special.logsumexp(s * d.values, b=d.probs) - s * t
    res = optimize.minimize_scalar(f, bounds=(0, 200), method="bounded",
                                   options={"xatol": 1e-12})
    return math.exp(min(res.fun, 0.0))


class TestChernoff:
    def test_coin(self):
        coin = DiscreteDist.from_atoms([(-1, 0.5), (1, 0.5)])
        assert oracle.chernoff_oracle(coin, 1.0) == pytest.approx(0.5, abs=1e-10)
        assert oracle.chernoff_oracle(coin, 0.0) == 1.0
        assert oracle.chernoff_oracle(coin, 1.5) == 0.0

    def test_coin_closed_form(self):
        # for a fair coin the optimum is exp(-t atanh t) cosh(atanh t)
        coin = DiscreteDist.from_atoms([(-1, 0.5), (1, 0.5)])
        for t in (0.1, 0.5, 0.9):
            s = math.atanh(t)
            assert oracle.chernoff_oracle(coin, t) == pytest.approx(math.exp(-s * t) * math.cosh(s), rel=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_reference(self, seed):
        d = random_mean_zero(np.random.default_rng(seed), 5)
        for t in np.linspace(0.05, 0.9, 6) * d.values[-1]:
            assert oracle.chernoff_oracle(d, t) == pytest.approx(chernoff_reference(d, t), rel=1e-7)

    @settings(max_examples=60, deadline=None)
    @given(mean_zero_dists())
    def test_below_zero_bias_bounds(self, d):
        # Y* lies in the support hull, so |Y* - Y| is at most its width
        sigma2 = zb.moments(d)[1]
        c = float(d.values[-1] - d.values[0])
        for t in np.linspace(0, 1.2, 7) * d.values[-1]:
            ch = oracle.chernoff_oracle(d, t)
            for kind in bounds.COUPLING_KINDS:
                v = bounds.evaluate(kind, sigma2, c, t)
                if v.applicable:
                    assert ch <= v.clamped + 1e-12

    def test_requires_mean_zero(self):
        with pytest.raises(DomainError):
            oracle.chernoff_oracle(DiscreteDist.from_atoms([(0, 0.5), (1, 0.5)]), 0.2)
        with pytest.raises(DomainError):
            oracle.chernoff_oracle(DiscreteDist.from_atoms([(-1, 0.5), (1, 0.5)]), -0.1)


class TestDomination:
    def test_A3(self, A3):
        rep = oracle.validate_domination(A3, UniformSn(3), [0, 1, 2, 3], ["one-sided"])
        assert rep.passed and len(rep.rows) == 4
        assert rep.meta["classes"][0]["c"] == 8.0

    def test_tlogt_not_applicable(self, A3):
        rep = oracle.validate_domination(A3, UniformSn(3), [1.0, 2.0, 3.0], ["tlogt-tight", "tlogt-loose"])
        assert rep.passed
        gated = [r for r in rep.rows if r.t <= math.e]
        assert len(gated) == 4 and all(r.satisfied is None and r.bound is None for r in gated)

    def test_negative_control(self, A3):
        rep = oracle.validate_domination(A3, UniformSn(3), [0, 1, 2, 3], ["one-sided"], bound_scale=1e-6)
        assert not rep.passed and rep.violations

    def test_constant_rejected(self):
        with pytest.raises(DomainError):
            oracle.validate_domination(SquareMatrix(np.ones((4, 4))), UniformSn(4), [0.0], ["one-sided"])

    def test_mc_needs_seed(self, A3):
        with pytest.raises(DomainError):
            oracle.validate_domination(A3, UniformSn(3), [0.0], ["one-sided"], method="monte_carlo")

    def test_mc_uses_upper_limit(self):
        A = SquareMatrix(np.random.default_rng(5).random((6, 6)))
        rep = oracle.validate_domination(A, UniformSn(6), [0.0, 0.5], ["one-sided"],
                                         method="monte_carlo", trials=2000, seed=3)
        for r in rep.rows:
            assert r.margin == pytest.approx(r.bound - r.ci_high)

    def test_serialization(self, A3):
        rep = oracle.validate_domination(A3, UniformSn(3), [1.0, 3.0], ["one-sided", "tlogt-tight"])
        lines = rep.to_csv().splitlines()
        assert lines[0] == ",".join(oracle.DominationRow.COLUMNS)
        assert len(lines) == 5
        blob = json.loads(json.dumps(rep.to_json()))
        assert [list(r) for r in blob["rows"]] == [list(oracle.DominationRow.COLUMNS)] * 4


class TestExpectedVariance:
    def test_uniform(self):
        res = oracle.expected_variance_experiment(10, "uniform01", 2000, seed=0)
        assert res.target_sigma2 == pytest.approx(0.75)
        assert res.target_mu == 5.0
        assert abs(res.z_sigma2) < 4 and abs(res.z_mu) < 4

    def test_degenerate(self):
        res = oracle.expected_variance_experiment(6, DiscreteDist.from_atoms([(0.5, 1.0)]), 50, seed=0)
        assert res.mean_sigma2 == pytest.approx(0, abs=1e-15)
        assert res.target_sigma2 == 0 and res.z_sigma2 == 0.0

    def test_bernoulli(self):
        res = oracle.expected_variance_experiment(5, DiscreteDist.from_atoms([(0, 0.7), (1, 0.3)]), 3000, seed=1)
        assert res.target_sigma2 == pytest.approx(4 * 0.21)
        assert abs(res.z_sigma2) < 4

    def test_support_checked(self):
        with pytest.raises(DomainError):
            oracle.expected_variance_experiment(4, DiscreteDist.from_atoms([(-1, 0.5), (1, 0.5)]), 10, 0)

    def test_batch_matches_scalar(self):
        entries = np.random.default_rng(2).random((5, 6, 6))
        mu, s2 = oracle.batch_moments_uniform(entries)
        for k in range(5):
            assert (mu[k], s2[k]) == pytest.approx(ps.moments_uniform(SquareMatrix(entries[k])), rel=1e-12)
