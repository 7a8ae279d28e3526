"""Closed-form condition checkers and their oracles."""

import numpy as np
import pytest

from bernstein_lab import conditions as cond
from bernstein_lab import geometry as geo


def test_theorem_a_boundary_case_passes():
    # product 0.81 equals 1 - 0.19 exactly: inclusive inequality, margin 0
    r = cond.check_theorem_a([0.9, 0.9], delta=0.19, k_min=0.5)
    assert r.pass_
    assert r.margin == 0.0
    assert np.isclose(r.details["star_omega"], 1 / 1.81)


def test_theorem_a_unit_product_fails():
    r = cond.check_theorem_a([1.0, 1.0], delta=0.01, k_min=0.01)
    assert not r.pass_ and r.margin < 0


def test_theorem_a_asymmetric_example():
    # arithmetic oracle: star omega = 1/sqrt(10 * 1.04)
    r = cond.check_theorem_a([3.0, 0.2], delta=0.1, k_min=0.3)
    assert r.pass_
    assert np.isclose(r.details["max_product"], 0.6)
    assert np.isclose(r.details["star_omega"], 1 / np.sqrt(10.4))


def test_theorem_a_rejects_bad_parameters():
    with pytest.raises(ValueError):
        cond.check_theorem_a([0.5], delta=1.0, k_min=0.5)
    with pytest.raises(ValueError):
        cond.check_theorem_a([0.5], delta=0.5, k_min=0.0)


def test_theorem_a_scale_monotone():
    rng = np.random.default_rng(0)
    for _ in range(500):
        n = int(rng.integers(2, 6))
        lam = rng.uniform(0, 2, size=n)
        delta = float(rng.uniform(0.01, 0.5))
        kmin = float(rng.uniform(0.01, 0.9))
        if not cond.check_theorem_a(lam, delta, kmin).pass_:
            continue
        t = float(rng.uniform(0, 1))
        assert cond.check_theorem_a(t * lam, delta, kmin).pass_


def test_jost_xin_values():
    assert cond.jost_xin_delta(np.zeros(4)) == 1.0
    assert np.isclose(cond.jost_xin_delta([1.0, 1.0]), 2.0)
    assert np.isclose(cond.jost_xin_delta([np.sqrt(3.0), 0.0]), 2.0)
    # boundary is strict
    assert not cond.check_jost_xin([1.0, 1.0]).pass_
    assert cond.check_jost_xin([0.9, 0.9]).pass_


def test_jost_xin_is_inverse_star_omega():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        lam = rng.uniform(0, 4, size=int(rng.integers(1, 7)))
        assert abs(cond.jost_xin_delta(lam) * geo.star_omega(lam) - 1.0) < 1e-12


def test_fc_hjw_threshold_values():
    assert np.isclose(cond.fc_hjw_threshold(1, 5), 0.4440158403, atol=1e-9)
    assert np.isclose(cond.fc_hjw_threshold(2, 2), 0.7220079202, atol=1e-9)
    # increasing in p, approaching 1
    prev = 0.0
    for p in range(1, 65):
        val = cond.fc_hjw_threshold(p, p)
        assert val > prev
        prev = val
    assert prev < 1.0 and prev > 0.99


def test_fc_hjw_report():
    r = cond.check_fc_hjw([0.1, 0.1], 2, 2)
    assert r.pass_
    r = cond.check_fc_hjw([1.0, 1.0], 2, 2)
    assert not r.pass_  # star omega 0.5 < 0.722


def test_implication_witness_examples():
    w = cond.implication_jx_to_a([0.9, 0.9])
    assert w.hypothesis and w.conclusion and not w.is_counterexample
    w = cond.implication_jx_to_a([1.5, 0.5])
    assert not w.hypothesis  # product of sums 4.0625 >= 4


def test_implication_random_sweep_small():
    rng = np.random.default_rng(2)
    for _ in range(20000):
        n = int(rng.integers(1, 7))
        lam = rng.uniform(0, 3, size=n)
        assert not cond.implication_jx_to_a(lam).is_counterexample


def test_grassmannian_g24_values():
    w1, w2 = cond.grassmannian_g24(0.0, 0.0)
    assert np.isclose(w1, 1 / np.sqrt(2)) and np.isclose(w2, 1 / np.sqrt(2))
    w1, _ = cond.grassmannian_g24(1.0, 1.0)
    assert abs(w1) < 1e-15  # hemisphere boundary at product one
    w1, w2 = cond.grassmannian_g24(2.0, 2.0)
    assert np.isclose(w1, -0.42426406871192851)
    assert np.isclose(w2, 0.70710678118654746)


def test_grassmannian_agrees_with_frame_bivector():
    # oracle: evaluate both 2-forms directly on the frame bivector e1 ^ e2
    rng = np.random.default_rng(3)
    for _ in range(1000):
        l1 = float(rng.uniform(0, 3))
        l2 = float(rng.uniform(0, 3))
        sign = float(rng.choice([-1.0, 1.0]))
        jac = np.diag([l1, sign * l2])
        sd = geo.singular_data(jac)
        e1, e2 = sd.tangent_frame[:, 0], sd.tangent_frame[:, 1]

        def two_form(v, w, rows):
            return v[rows[0]] * w[rows[1]] - v[rows[1]] * w[rows[0]]

        dx = two_form(e1, e2, (0, 1))
        dy = two_form(e1, e2, (2, 3))
        w1, w2 = cond.grassmannian_g24(l1, sign * l2)
        assert abs(w1 - (dx - dy) / np.sqrt(2)) < 1e-10
        assert abs(w2 - (dx + dy) / np.sqrt(2)) < 1e-10
        # both positive iff |product| < 1
        r = cond.check_hemisphere24(l1, sign * l2)
        assert r.pass_ == (abs(l1 * l2) < 1.0) or abs(abs(l1 * l2) - 1) < 1e-12


def test_report_json_shape():
    r = cond.check_theorem_a([0.5, 0.5], delta=0.2, k_min=0.2)
    obj = r.to_json()
    assert obj["condition"] == "TheoremA"
    assert isinstance(obj["pass"], bool)
    assert set(obj["details"]) >= {"max_product", "star_omega"}
