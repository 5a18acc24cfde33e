import itertools
import random

import pytest

from scn.analytic import expected_payoff
from scn.equilibrium import (SizeGuardError, best_deviation, best_responses, br_dynamics,
                             enumerate_equilibria, nash_check)
from scn.model import (CONE, EMPTY, FULL, HeteroParams, ModelParams, Network, all_subsets,
                       build_network, canonical_2x2, empty_network)

NETS = canonical_2x2()


def P(n=2, m=2, **kw):
    return ModelParams(n=n, m=m, **kw)


def profiles(report):
    return sorted(e.network.profile() for e in report.equilibria)


def test_best_response_joins_cone():
    net = build_network(2, 2, [(), (0,)])
    assert best_responses(0, net, P(lam=0.8, c=0.01)) == (frozenset({0}),)


def test_best_response_empty_without_failures():
    for peer in all_subsets(2):
        net = build_network(2, 2, [(), peer])
        assert best_responses(0, net, P(lam=1.0, c=0.01)) == (frozenset(),)


def test_best_response_avoids_congestion():
    net = build_network(2, 2, [(), (0,)])
    assert best_responses(0, net, P(lam=0.9, gamma=0.05)) == (frozenset({1}),)


def test_ties_are_all_returned():
    # with lambda = 1 and c = 0 every neighborhood pays exactly zero
    net = build_network(2, 2, [(), (0,)])
    assert len(best_responses(0, net, P(lam=1.0, c=0.0))) == 4


def test_nash_examples():
    assert nash_check(empty_network(2, 2), P(lam=0.8, c=0.01))[0]
    assert nash_check(NETS["cone"], P(lam=0.8, c=0.01))[0]
    ok, cert = nash_check(NETS["parallel"], P(lam=0.8, c=0.01))
    assert not ok
    peer = 1 - cert.retailer
    assert cert.improving == NETS["parallel"].links[peer]


def test_certificate_gain_recomputes():
    p = P(lam=0.8, gamma=0.03, c=0.01)
    for name, net in NETS.items():
        cert = best_deviation(0, net, p)
        if cert is None:
            continue
        moved = net.with_links(cert.retailer, cert.improving)
        gain = expected_payoff(moved, p, cert.retailer) - expected_payoff(net, p, cert.retailer)
        assert gain == pytest.approx(cert.gain) and gain > 0


def test_enumeration_examples():
    rep = enumerate_equilibria(P(lam=0.8, c=0.01), 2, 2)
    assert profiles(rep) == [((), ()), ((0,), (0,)), ((1,), (1,))]
    assert rep.classes == {EMPTY, CONE}
    assert rep.examined == 16
    assert enumerate_equilibria(P(lam=1.0, c=0.01)).classes == {EMPTY}
    assert enumerate_equilibria(P(lam=0.85, gamma=0.05, c=1e-9)).classes == {EMPTY, FULL}


def test_every_non_nash_profile_has_certificate():
    rep = enumerate_equilibria(P(lam=0.7, gamma=0.02, c=0.003))
    nash = {e.network.profile() for e in rep.equilibria}
    assert len(nash) + len(rep.certificates) == rep.examined
    for prof, cert in rep.certificates.items():
        net = build_network(2, 2, prof)
        assert not nash_check(net, P(lam=0.7, gamma=0.02, c=0.003))[0]
        assert cert.gain > 0
    for e in rep.equilibria:
        assert nash_check(e.network, P(lam=0.7, gamma=0.02, c=0.003))[0]


def _naive(params, n, m):
    subsets = all_subsets(m)
    out = []
    for combo in itertools.product(subsets, repeat=n):
        net = Network((n, m), (tuple(combo),))
        stable = True
        for i in range(n):
            here = expected_payoff(net, params, i)
            for s in subsets:
                if expected_payoff(net.with_links(i, s), params, i) > here + 1e-12:
                    stable = False
        if stable:
            out.append(net.profile())
    return sorted(out)


def test_matches_naive_oracle():
    rng = random.Random(4)
    for _ in range(20):
        n, m = rng.randint(1, 3), rng.randint(1, 3)
        if rng.random() < 0.3:
            p = HeteroParams(n, m, rng.uniform(0.5, 0.95), tuple(rng.uniform(0.5, 0.95) for _ in range(m)),
                             tuple(rng.uniform(0, 0.2) for _ in range(m)), c=rng.uniform(0, 0.02))
        else:
            p = P(n, m, lam=rng.uniform(0.5, 0.98), gamma=rng.uniform(0, 0.2), c=rng.uniform(0, 0.02))
        assert profiles(enumerate_equilibria(p, n, m)) == _naive(p, n, m)


@pytest.mark.parametrize("n, m", [(2, 2), (2, 3), (3, 3)])
@pytest.mark.parametrize("lam", [0.65, 0.8])
def test_no_congestion_theorem(n, m, lam):
    c = 0.5 * lam * (1 - lam) * (n - 1) * (lam ** 2 + lam - 1)
    got = profiles(enumerate_equilibria(P(n, m, lam=lam, c=c), n, m))
    want = sorted([tuple(() for _ in range(n))] + [tuple((j,) for _ in range(n)) for j in range(m)])
    assert got == want


@pytest.mark.parametrize("n, m", [(2, 2), (2, 3), (3, 3)])
def test_low_congestion_same_as_none(n, m):
    lam = 0.8
    c = 0.5 * lam * (1 - lam) * (n - 1) * (lam ** 2 + lam - 1)
    gamma = 0.5 * (1 - lam) * (1 - lam ** 2) / n
    a = profiles(enumerate_equilibria(P(n, m, lam=lam, c=c), n, m))
    b = profiles(enumerate_equilibria(P(n, m, lam=lam, c=c, gamma=gamma), n, m))
    assert a == b


def test_symmetric_regime_network_is_nash():
    net = build_network(4, 4, [(0, 1), (0, 1), (2, 3), (2, 3)])
    assert nash_check(net, P(4, 4, lam=0.8, c=0.0064, gamma=0.072)) == (True, None)


def test_canonical_mode_dedupes_supplier_labels():
    rep = enumerate_equilibria(P(n=2, m=3, lam=0.8, c=0.01), canonical=True)
    assert profiles(rep) == [((), ()), ((0,), (0,))]


def test_size_guard():
    with pytest.raises(SizeGuardError):
        enumerate_equilibria(P(n=5, m=4))
    with pytest.raises(SizeGuardError):
        best_responses(0, empty_network(1, 17), P(n=1, m=17))


def test_param_size_mismatch():
    with pytest.raises(ValueError):
        enumerate_equilibria(P(n=2, m=2), 3, 2)
    with pytest.raises(ValueError):
        nash_check(empty_network(3, 2), P(n=2, m=2))


def test_dynamics_full_to_cone():
    tr = br_dynamics(NETS["full"], P(lam=0.8, c=0.01))
    assert tr.converged
    final = tr.networks[-1]
    assert final.profile() in (((0,), (0,)), ((1,), (1,)))
    assert nash_check(final, P(lam=0.8, c=0.01))[0]


def test_dynamics_fixed_points():
    p = P(lam=0.9, gamma=0.05)
    tr = br_dynamics(NETS["parallel"], p)
    assert len(tr.networks) == 1 and tr.converged
    assert len(br_dynamics(NETS["cone"], P(lam=0.8, c=0.01)).networks) == 1


def test_dynamics_reports_non_convergence():
    tr = br_dynamics(NETS["full"], P(lam=0.8, c=0.01), max_rounds=1)
    assert not tr.converged
