import numpy as np
import pytest

import qnk


def test_trapezoid_weights():
    w = qnk.weight_field(qnk.uniform_grid([3]), "trapezoid")
    np.testing.assert_allclose(w, [0.25, 0.5, 0.25])
    w2 = qnk.weight_field(qnk.uniform_grid([3, 3]))
    assert w2.shape == (3, 3)
    assert w2[1, 1] == pytest.approx(0.25)
    assert w2.sum() == pytest.approx(1.0)


def test_incompatible_rule_raises():
    with pytest.raises(ValueError):
        qnk.weight_field(qnk.uniform_grid([4]), "boole")


def test_grid_factories():
    g = qnk.boundary_refined_grid(5, dim=1, strength=2.0)
    c = g.coords(0)
    assert c[1] < 0.25
    assert g.kind(0) == "nonuniform"
    assert qnk.periodic_grid([4]).coords(0) == [0.0, 0.25, 0.5, 0.75]
    w = qnk.weight_field(qnk.custom_grid([[0.0, 0.1, 0.5, 1.0]]))
    np.testing.assert_allclose(w, [0.05, 0.25, 0.45, 0.25])


def test_moments_and_normalize():
    g = qnk.uniform_grid([3])
    x = np.array([[[0.0, 0.25, 1.0]]])
    mean, var = qnk.moments(x, g, pattern="instance", rule="trapezoid")
    assert mean[0, 0] == pytest.approx(0.375)
    mean_u, _ = qnk.moments(x, g, rule="uniform")
    assert mean_u[0, 0] == pytest.approx(5.0 / 12.0)

    g2 = qnk.boundary_refined_grid(17, dim=2)
    f = qnk.sample_field("bump2d", g2, channels=2)
    assert f.shape == (1, 2, 17, 17)
    y = qnk.normalize(f, g2, method="quadnorm", epsilon=0.0)
    wm, wv = qnk.moments(y, g2)
    assert abs(wm[0, 0]) < 1e-12
    assert wv[0, 0] == pytest.approx(1.0)


def test_periodic_collapse():
    g = qnk.periodic_grid([8, 8])
    x = np.random.default_rng(0).normal(size=(2, 4, 8, 8))
    a = qnk.normalize(x, g, method="layernorm")
    b = qnk.normalize(x, g, method="quadnorm")
    assert np.max(np.abs(a - b)) <= 1e-14


def test_interpolate_constant():
    g = qnk.uniform_grid([3, 3])
    x = np.full((1, 1, 3, 3), 5.0)
    y = qnk.interpolate(x, g, qnk.uniform_grid([5, 5]))
    np.testing.assert_allclose(y, 5.0)


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        qnk.normalize(np.zeros((1, 1, 4)), qnk.uniform_grid([5]))


def test_ladders_and_bias():
    r = qnk.statistic_ladder("quadratic1d", [17, 33, 65, 129, 257], 1, rule="uniform")
    assert 0.8 <= r["fitted_order"] <= 1.2
    assert len(r["rungs"]) == 4
    b = qnk.bias_report("bump2d", qnk.boundary_refined_grid(64, dim=2, strength=3.0))
    assert b["reduction_factor"] >= 100


def test_statkit():
    assert qnk.holm_bonferroni([0.01, 0.04]) == [True, True]
    assert qnk.holm_bonferroni([0.03, 0.04]) == [False, False]
    imp, lo, hi = qnk.bootstrap_improvement_ci([2, 2, 2], [1, 1, 1], resamples=200)
    assert (imp, lo, hi) == (0.5, 0.5, 0.5)
    t, p = qnk.paired_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert p == 1.0
    r = qnk.tost_equivalence([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], margin=0.5)
    assert r["equivalent"]


def test_transfer_discrepancy_small():
    r = qnk.transfer_discrepancy(n=17, n_prime=17, depth=1, width=4, modes=4, ensemble=1)
    assert r["discrepancy"] == 0.0
    r = qnk.transfer_discrepancy(n=17, n_prime=33, depth=2, width=4, modes=4, ensemble=1)
    assert r["discrepancy"] > 0.0
    assert len(r["per_layer"]) == 3


def test_acceptance_subset():
    res = qnk.run_acceptance(only=[1, 5])
    assert [r["id"] for r in res] == [1, 5]
    assert all(r["passed"] for r in res)
