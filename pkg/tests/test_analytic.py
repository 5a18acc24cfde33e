
import pytest

from scn.analytic import (UndefinedRegimeError, congestion, d_hat, expected_payoff, f_hat,
                          lambda_hat, low_gamma_threshold, payoff_congestion,
                          payoff_hetero_retailer, payoff_hetero_supplier, payoff_no_congestion,
                          regime_quantities, retailer_payoffs, rho, supplier_payoffs)
from scn.model import HeteroParams, ModelParams, all_profiles, build_multitier, build_network, canonical_2x2
from scn.thresholds import PRINTED_PAYOFF, candidate_payoff

from conftest import random_network

NETS = canonical_2x2()


def P(n=2, m=2, **kw):
    return ModelParams(n=n, m=m, **kw)


def test_rho_cone_of_three():
    net = build_network(3, 2, [(0,)] * 3)
    assert [rho(net, i) for i in range(3)] == [2.0, 2.0, 2.0]


def test_rho_parallel_and_zee():
    assert [rho(NETS["parallel"], i) for i in range(2)] == [0.0, 0.0]
    assert [rho(NETS["zee"], i) for i in range(2)] == [0.5, 1.0]


def test_rho_ignores_inactive_and_isolated():
    net = build_network(3, 2, [(0,), (), (0, 1)])
    assert rho(net, 1) == 0.0
    assert rho(net, 0) == 0.5


def test_congestion_examples():
    zee = NETS["zee"]
    assert congestion(zee, 0) == 1.5
    assert congestion(zee, 1) == 0.5
    assert congestion(zee, 0, exclude=0) == 0.5
    assert congestion(NETS["cone"], 1) == 0.0


def test_lemma_identity(rng):
    for _ in range(300):
        net = random_network(rng, rng.randint(1, 8), rng.randint(1, 8))
        for i in range(net.n):
            via_f = sum(congestion(net, j, exclude=i) for j in net.links[i])
            assert abs(rho(net, i) - via_f) <= 1e-12


def test_no_congestion_cone_and_parallel():
    assert payoff_no_congestion(NETS["cone"], P(lam=0.8), 0) == pytest.approx(0.128, abs=1e-12)
    assert payoff_no_congestion(NETS["parallel"], P(lam=0.8), 0) == pytest.approx(0.0704, abs=1e-12)


def test_inactive_retailer_gets_zero():
    net = build_network(2, 2, [(0,), ()])
    assert payoff_no_congestion(net, P(c=0.1), 1) == 0.0
    assert payoff_congestion(net, P(c=0.1, gamma=0.3), 1) == 0.0


def test_congested_full_value():
    assert payoff_congestion(NETS["full"], P(lam=0.8, gamma=0.02), 0) == pytest.approx(0.0752, abs=1e-12)


def test_congested_cone_value():
    # checked against 2e5-sample simulation; penalty is 2*lambda*gamma*D^2
    assert payoff_congestion(NETS["cone"], P(lam=0.8, gamma=0.02), 0) == pytest.approx(0.096, abs=1e-12)


def test_gamma_zero_reduces_on_all_profiles(rng):
    for lam in (0.3, 0.65, 0.9):
        p = P(lam=lam, c=0.01)
        for net in all_profiles(2, 2):
            for i in range(2):
                assert payoff_congestion(net, p, i) == pytest.approx(payoff_no_congestion(net, p, i), abs=1e-12)
    for _ in range(50):
        n, m = rng.randint(1, 6), rng.randint(1, 6)
        net = random_network(rng, n, m)
        p = P(n, m, lam=rng.uniform(0.1, 0.95), D=rng.uniform(0.5, 2), c=rng.uniform(0, 0.1))
        for i in range(n):
            assert payoff_congestion(net, p, i) == pytest.approx(payoff_no_congestion(net, p, i), abs=1e-12)


def test_hetero_homogeneous_degeneracy(rng):
    for _ in range(100):
        n, m = rng.randint(1, 5), rng.randint(1, 5)
        net = random_network(rng, n, m)
        p = P(n, m, lam=rng.uniform(0.05, 0.95), D=rng.uniform(0.5, 2), c=rng.uniform(0, 0.1),
              gamma=rng.uniform(0, 0.5))
        h = HeteroParams.homogeneous(p)
        for i in range(n):
            assert payoff_hetero_retailer(net, h, i) == pytest.approx(payoff_congestion(net, p, i), abs=1e-12)


def test_hetero_decreasing_in_gamma_j():
    net = NETS["zee"]
    base = HeteroParams(2, 2, 0.8, (0.7, 0.6), (0.1, 0.2))
    for j in range(2):
        g = list(base.gamma_sup)
        g[j] += 0.05
        bumped = HeteroParams(2, 2, 0.8, base.lambda_sup, tuple(g))
        for i in range(2):
            if j in net.links[i]:
                assert payoff_hetero_retailer(net, bumped, i) < payoff_hetero_retailer(net, base, i)


def test_supplier_payoffs():
    cone = NETS["cone"]
    h = HeteroParams(2, 2, 0.7, (0.8, 0.6), (0.0, 0.0))
    assert payoff_hetero_supplier(cone, h, 0) == pytest.approx(0.0, abs=1e-12)
    assert payoff_hetero_supplier(cone, h, 1) == 0.0
    assert payoff_hetero_supplier(NETS["parallel"], h, 0) == pytest.approx(0.8 * 0.4, abs=1e-12)
    assert supplier_payoffs(NETS["parallel"], h)[1] == pytest.approx(0.6 * 0.2, abs=1e-12)


def test_expected_payoff_dispatch():
    p = P(lam=0.7, gamma=0.1, c=0.01)
    h = HeteroParams.homogeneous(p)
    for net in NETS.values():
        assert retailer_payoffs(net, h) == pytest.approx(retailer_payoffs(net, p), abs=1e-12)
        assert expected_payoff(net, p, 0) == payoff_congestion(net, p, 0)


def test_lambda_one_payoff_is_minus_cost(rng):
    for _ in range(30):
        n, m = rng.randint(1, 5), rng.randint(1, 5)
        net = random_network(rng, n, m)
        c = rng.uniform(0, 0.1)
        p = P(n, m, lam=1.0, c=c, gamma=0.0)
        for i in net.active:
            assert payoff_congestion(net, p, i) == pytest.approx(-c * net.out_degrees[i], abs=1e-12)


def test_closed_forms_reject_multitier():
    net = build_multitier((2, 2, 1), [[(0,), (1,)], [(0,), (0,)]])
    with pytest.raises(ValueError):
        payoff_congestion(net, P(tiers=(2, 2, 1)), 0)


GRID = [(lam, g, D, c) for lam in (0.1, 0.3, 0.5, 0.65, 0.8, 0.9, 0.95)
        for g in (0.0, 0.01, 0.05) for D in (1.0, 2.0) for c in (0.0, 0.01)]


@pytest.mark.parametrize("name", ["parallel", "zee1", "zee2", "full"])
def test_printed_candidate_polynomials(name):
    for lam, g, D, c in GRID:
        assert candidate_payoff(name, lam, g, c, D) == pytest.approx(
            PRINTED_PAYOFF[name](lam, g, c, D), abs=1e-12)


def test_printed_cone_polynomial_disagrees():
    got = candidate_payoff("cone", 0.8, 0.02)
    assert got == pytest.approx(0.096, abs=1e-12)
    assert PRINTED_PAYOFF["cone"](0.8, 0.02, 0.0, 1.0) == pytest.approx(0.1296, abs=1e-12)
    for lam, g, D, c in GRID:
        assert candidate_payoff("cone", lam, g, c, D) == pytest.approx(
            lam * (lam - lam ** 2 - 2 * g) * D ** 2 - c, abs=1e-12)


def test_regime_examples():
    assert d_hat(0.8, 1.0, 0.0016) == pytest.approx(4.0, abs=1e-12)
    assert f_hat(0.5, 0.1, 4) == pytest.approx(3.5, abs=1e-12)
    assert lambda_hat(0.6, 0.6, 0.7, 0.3) == pytest.approx(0.72941, abs=1e-5)
    assert f_hat(0.9, 10.0, 1) == 0.0
    assert low_gamma_threshold(0.8, 2) == pytest.approx(0.2 * 0.36 / 2)


def test_regime_undefined():
    with pytest.raises(UndefinedRegimeError):
        d_hat(0.8, 1.0, 0.0)
    with pytest.raises(UndefinedRegimeError):
        f_hat(0.8, 0.0, 2)
    q = regime_quantities(P(n=3, lam=0.8, c=0.0064, gamma=0.072))
    assert q.d_hat == pytest.approx(2.0)
    assert q.f_hat(2) == pytest.approx(0.5)
    assert q.low_gamma_threshold > 0
