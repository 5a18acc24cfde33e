import math

import numpy as np
import pytest

from scn.thresholds import (CANDIDATES, GAMMA_HAT_PAIRS, PRINTED_LAMBDA_MIN, bisect,
                            candidate_payoff, find_root, gamma_hat_crossings, solved_lambda_min,
                            thresholds_2x2)

LAMS = np.linspace(0.62, 0.99, 30)


def test_examples_at_0_9():
    th = thresholds_2x2(0.9)
    assert th.gamma_hat["fz1"] == pytest.approx(0.008, abs=1e-10)
    assert th.gamma_hat["pc"] == pytest.approx(2 / 3 * 0.01 * 1.9, abs=1e-10)
    assert th.gamma_hat["pz2"] == pytest.approx(0.036, abs=1e-10)
    assert th.gamma_hat_printed["pz2"] == pytest.approx(0.009)
    assert th.gamma_hat_discrepancy["pz2"]
    assert not th.gamma_hat_discrepancy["fz1"]
    assert not th.gamma_hat_discrepancy["pc"]


def test_z2c_solves_against_cone():
    for lam in LAMS:
        th = thresholds_2x2(lam)
        assert th.gamma_hat["z2c"] == pytest.approx(4 / 11 * (1 - lam) ** 2 * (lam + 2), abs=1e-10)
    assert thresholds_2x2(0.9).gamma_hat_discrepancy["z2c"]


def test_residuals_small():
    for lam in LAMS:
        for c in (0.0, 0.01):
            th = thresholds_2x2(lam, c)
            assert max(th.gamma_hat_residual.values()) < 1e-10


def test_roots_are_payoff_equalities():
    th = thresholds_2x2(0.75, 0.005, 1.3)
    for name, (a, b) in GAMMA_HAT_PAIRS.items():
        g = th.gamma_hat[name]
        assert candidate_payoff(a, 0.75, g, 0.005, 1.3) == pytest.approx(
            candidate_payoff(b, 0.75, g, 0.005, 1.3), abs=1e-10)


def test_ordering_on_parallel_domain():
    for lam in np.linspace((math.sqrt(5) - 1) / 2 + 1e-6, 0.999, 60):
        assert thresholds_2x2(lam).ordering_holds()


def test_lambda_min():
    assert PRINTED_LAMBDA_MIN["parallel"] == pytest.approx(0.6180, abs=5e-5)
    assert PRINTED_LAMBDA_MIN["zee1"] == pytest.approx(0.4142, abs=5e-5)
    assert PRINTED_LAMBDA_MIN["full"] == pytest.approx(0.5616, abs=5e-5)
    for name in CANDIDATES:
        assert solved_lambda_min(name) == pytest.approx(PRINTED_LAMBDA_MIN[name], abs=1e-9)


def test_gamma_max():
    for lam in LAMS:
        th = thresholds_2x2(lam)
        for name in ("parallel", "zee1", "zee2", "full"):
            assert th.gamma_max[name] == pytest.approx(th.gamma_max_printed[name], abs=1e-9)
        assert th.gamma_max["cone"] == pytest.approx(lam * (1 - lam) / 2, abs=1e-9)
        assert th.gamma_max_discrepancy["cone"]


def test_c_max():
    th = thresholds_2x2(0.85)
    for g in (0.0, 0.02):
        solved = th.c_max(g)
        for name in CANDIDATES:
            links = 2 if name in ("zee2", "full") else 1
            assert candidate_payoff(name, 0.85, g, solved[name] * links) == pytest.approx(0, abs=1e-12) \
                or name in ("zee2", "full")
        assert solved["parallel"] == pytest.approx(0.85 * (-0.85 ** 3 + 2 * 0.85 - 1 - g / 2))
    flags = th.c_max_discrepancy(0.0)
    assert flags["parallel"] and flags["cone"]
    assert not any(flags[k] for k in ("zee1", "zee2", "full"))


def test_two_link_cost_bound_is_per_link():
    th = thresholds_2x2(0.85)
    cm = th.c_max(0.01)["full"]
    assert candidate_payoff("full", 0.85, 0.01, cm) == pytest.approx(0, abs=1e-12)


def test_feasible_gamma_shrinks_with_cost():
    a, b = thresholds_2x2(0.9), thresholds_2x2(0.9, c=0.01)
    for name in CANDIDATES:
        assert b.gamma_feasible[name] < a.gamma_feasible[name]


def test_gamma_hats_move_with_cost():
    th = thresholds_2x2(0.8, c=0.01)
    assert th.gamma_hat["fz1"] == pytest.approx(0.8 * (0.04 + 2 * 0.01 / 0.8), abs=1e-10)
    assert th.gamma_hat["pc"] == pytest.approx(th.gamma_hat_c0["pc"], abs=1e-10)


def test_curves_share_a_crossing_at_positive_cost():
    pts = gamma_hat_crossings(0.01, lo=0.5, hi=0.99, steps=100)
    assert len(pts) == 6
    lams = [p["lambda"] for p in pts]
    gams = [p["gamma"] for p in pts]
    assert max(lams) - min(lams) < 1e-8
    assert max(gams) - min(gams) < 1e-8


def test_invalid_lambda():
    for lam in (0.0, 1.0, 1.2):
        with pytest.raises(ValueError):
            thresholds_2x2(lam)


def test_bisect_and_find_root():
    assert bisect(lambda x: x * x - 2, 0, 2) == pytest.approx(math.sqrt(2), abs=1e-12)
    with pytest.raises(ValueError):
        bisect(lambda x: x * x + 1, 0, 2)
    assert find_root(lambda x: x - 7.5, 0, 1) == pytest.approx(7.5, abs=1e-9)
    assert math.isnan(find_root(lambda x: 1.0, 0, 1))
