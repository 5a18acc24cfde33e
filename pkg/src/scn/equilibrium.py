"""Best responses, pure-Nash checks and exhaustive equilibrium enumeration."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .analytic import expected_payoff
from .model import Network, Params, all_subsets, describe

TOL = 1e-12
MAX_SUPPLIERS = 16
MAX_PROFILES = 1 << 16


class SizeGuardError(ValueError):
    """The requested exhaustive search is too large."""


@dataclass(frozen=True)
class DeviationCertificate:
    retailer: int
    original: frozenset[int]
    improving: frozenset[int]
    gain: float

    def __str__(self) -> str:
        fmt = lambda s: "{" + ",".join(str(j + 1) for j in sorted(s)) + "}"
        return (f"retailer {self.retailer + 1}: {fmt(self.original)} -> "
                f"{fmt(self.improving)} gains {self.gain:.6g}")


def _check(net: Network, params: Params) -> None:
    if net.num_tiers != 2:
        raise ValueError("equilibrium analysis covers two-tier networks only")
    if tuple(params.tier_sizes) != (net.n, net.m):
        raise ValueError(f"parameters are for {params.tier_sizes}, network is {net.n}x{net.m}")
    if net.m > MAX_SUPPLIERS:
        raise SizeGuardError(f"m = {net.m} exceeds {MAX_SUPPLIERS} for exhaustive best "
                             "responses; use br_dynamics from a chosen start instead")


def deviation_payoffs(i: int, net: Network, params: Params) -> list[tuple[frozenset[int], float]]:
    """Payoff of retailer ``i`` for every neighborhood, peers held fixed."""
    _check(net, params)
    return [(s, expected_payoff(net.with_links(i, s), params, i)) for s in all_subsets(net.m)]


def best_responses(i: int, net: Network, params: Params) -> tuple[frozenset[int], ...]:
    """All payoff-maximizing neighborhoods of ``i``, in size-then-lexicographic order."""
    options = deviation_payoffs(i, net, params)
    best = max(v for _, v in options)
    return tuple(s for s, v in options if v >= best - TOL)


def best_deviation(i: int, net: Network, params: Params) -> DeviationCertificate | None:
    """Largest strictly improving deviation of ``i``, or ``None``."""
    current = expected_payoff(net, params, i)
    top, gain = None, TOL
    for s, v in deviation_payoffs(i, net, params):
        if v - current > gain:
            top, gain = s, v - current
    if top is None:
        return None
    return DeviationCertificate(i, net.links[i], top, gain)


def nash_check(net: Network, params: Params) -> tuple[bool, DeviationCertificate | None]:
    """Whether ``net`` is a pure Nash equilibrium, with the maximal-gain deviation if not."""
    certs = [c for i in range(net.n) if (c := best_deviation(i, net, params)) is not None]
    if not certs:
        return True, None
    return False, max(certs, key=lambda c: c.gain)


@dataclass(frozen=True)
class NashNetwork:
    network: Network
    label: str
    payoffs: tuple[float, ...]


@dataclass
class EquilibriumReport:
    """Nash profiles of an n x m game plus a certificate for every other profile."""

    n: int
    m: int
    equilibria: list[NashNetwork]
    examined: int
    certificates: dict[tuple, DeviationCertificate] = field(default_factory=dict)

    @property
    def classes(self) -> set[str]:
        return {e.label for e in self.equilibria}

    @property
    def networks(self) -> list[Network]:
        return [e.network for e in self.equilibria]


def _supplier_canonical(profile: tuple[frozenset[int], ...], m: int) -> tuple:
    keys = []
    for perm in itertools.permutations(range(m)):
        keys.append(tuple(tuple(sorted(perm[j] for j in s)) for s in profile))
    return min(keys)


def enumerate_equilibria(params: Params, n: int | None = None, m: int | None = None,
                         canonical: bool = False) -> EquilibriumReport:
    """Check every labeled profile of the two-tier game.

    Payoffs are tabulated once per profile, so each unilateral deviation is
    a table lookup. With ``canonical`` the Nash list keeps one
    representative per supplier relabeling.
    """
    n = params.tier_sizes[0] if n is None else n
    m = params.tier_sizes[1] if m is None else m
    if tuple(params.tier_sizes) != (n, m):
        raise ValueError(f"parameters are for {params.tier_sizes}, asked for {n}x{m}")
    subsets = all_subsets(m)
    k = len(subsets)
    if k ** n > MAX_PROFILES:
        raise SizeGuardError(f"{k}^{n} profiles exceed the limit of {MAX_PROFILES}")

    table: dict[tuple[int, ...], tuple[float, ...]] = {}
    nets: dict[tuple[int, ...], Network] = {}
    for idx in itertools.product(range(k), repeat=n):
        net = Network((n, m), (tuple(subsets[a] for a in idx),))
        nets[idx] = net
        table[idx] = tuple(expected_payoff(net, params, i) for i in range(n))

    found, certs, seen = [], {}, set()
    for idx, pay in table.items():
        cert = None
        for i in range(n):
            for alt in range(k):
                if alt == idx[i]:
                    continue
                dev = idx[:i] + (alt,) + idx[i + 1:]
                gain = table[dev][i] - pay[i]
                if gain > TOL and (cert is None or gain > cert.gain):
                    cert = DeviationCertificate(i, subsets[idx[i]], subsets[alt], gain)
        net = nets[idx]
        if cert is not None:
            certs[net.profile()] = cert
            continue
        if canonical:
            key = _supplier_canonical(net.links, m)
            if key in seen:
                continue
            seen.add(key)
        found.append(NashNetwork(net, describe(net), pay))
    return EquilibriumReport(n, m, found, len(table), certs)


@dataclass(frozen=True)
class Trajectory:
    networks: list[Network]
    converged: bool
    rounds: int


def br_dynamics(start: Network, params: Params, max_rounds: int = 100) -> Trajectory:
    """Round-robin best-response dynamics.

    A retailer moves only if its current neighborhood is not a best response
    (strict gain); it then takes the first best response in
    size-then-lexicographic order. Stops after a full round without moves.
    """
    _check(start, params)
    net, path = start, [start]
    for rnd in range(1, max_rounds + 1):
        moved = False
        for i in range(net.n):
            options = deviation_payoffs(i, net, params)
            current = expected_payoff(net, params, i)
            best = max(v for _, v in options)
            if best - current > TOL:
                choice = next(s for s, v in options if v >= best - TOL)
                net = net.with_links(i, choice)
                path.append(net)
                moved = True
        if not moved:
            return Trajectory(path, True, rnd)
    return Trajectory(path, False, max_rounds)
