import math

import numpy as np
import pytest

import distseq


def test_gram_state_matches_numpy():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    s = distseq.GramState(3)
    for row in X:
        s.absorb(row, 0.0)
    G = X.T @ X
    assert s.n == 40
    np.testing.assert_allclose(s.gram_inv, np.linalg.inv(G), rtol=1e-10)
    assert s.log_det == pytest.approx(np.linalg.slogdet(G)[1], rel=1e-12)


def test_rank_deficient_raises():
    s = distseq.GramState(2)
    s.absorb(np.array([1.0, 1.0]), 1.0)
    with pytest.raises(distseq.RankDeficient):
        s.gram_inv
    with pytest.raises(distseq.RankDeficient):
        distseq.factorize_spd(np.zeros((2, 2)))


def test_scalar_helpers():
    assert distseq.chi2_quantile(2, 0.95) == pytest.approx(-2 * math.log(0.05))
    assert distseq.min_eig(np.array([[1.0, 1.0], [1.0, 2.0]])) == pytest.approx((3 - math.sqrt(5)) / 2)
    assert distseq.d_optimal_score(np.array([1.0, 3.0]), np.eye(2)) == pytest.approx(11.0)
    keep, beta = distseq.shrink(np.array([0.0, 1.0, 0.1]), 256)
    assert list(keep) == [0, 1, 0]
    assert not distseq.stopping_inequality(100, 1.0, 2.618034, 5.991465, 0.2)
    assert distseq.stopping_inequality(400, 1.0, 2.618034, 5.991465, 0.2)


def test_fit_merges_procedures():
    X, y, beta0 = distseq.gen_clean("s1", 6000, 11)
    r = distseq.fit(X, y, M=5, d=0.2, seed=4)
    assert len(r["per_procedure"]) == 5
    assert r["N_star"] == sum(p["N"] for p in r["per_procedure"])
    assert r["exact"]["max_axis"] <= 0.4 + 1e-9
    assert r["approx"]["max_axis"] <= 0.4 + 1e-9
    ids = np.concatenate([p["claimed_ids"] for p in r["per_procedure"]])
    assert len(ids) == len(set(ids.tolist()))
    again = distseq.fit(X, y, M=5, d=0.2, seed=4)
    np.testing.assert_array_equal(r["beta_hat"], again["beta_hat"])


def test_fit_with_shrinkage_recovers_support():
    X, y, beta0 = distseq.gen_clean("ase1", 6000, 5)
    r = distseq.fit(X, y, M=5, d=0.2, ase=True, seed=9)
    np.testing.assert_array_equal(r["indicator"], (beta0 != 0).astype(int))
    assert distseq.contains(r["ase"]["center"], r["ase"]["shape"], r["ase"]["radius"], r["ase"]["center"])


def test_simulate_report_keys():
    rep = distseq.simulate("s1", M=2, reps=20, seed=3)
    for key in ("n_stop", "coverage_exact", "coverage_approx", "se", "ad", "per_procedure"):
        assert key in rep
    assert len(rep["per_procedure"]) == 2
    assert rep == distseq.simulate("s1", M=2, reps=20, seed=3)
    dc = distseq.divide_and_conquer("s1", M=2, reps=5, seed=3, pool_size=500)
    assert dc["N"] == 500


def test_bad_arguments():
    with pytest.raises(ValueError):
        distseq.simulate("nope")
    with pytest.raises(ValueError):
        distseq.fit(np.ones((5, 2)), np.ones(4))
