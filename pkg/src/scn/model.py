"""Domain types for the supply chain formation game.

Networks are stored with 0-based agent indices. The JSON file format uses
1-based indices; conversion happens only in :func:`network_from_dict` and
:func:`network_to_dict`.
"""

from __future__ import annotations

import itertools
import json
import operator
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence


class NetworkError(ValueError):
    """Raised for malformed networks or network files."""


@dataclass(frozen=True)
class ModelParams:
    """Homogeneous game parameters.

    ``lam`` is the production success probability shared by every agent,
    ``gamma`` the congestion coefficient shared by every supplier.
    ``tiers`` (tier sizes, retailers first) is only needed for T > 2
    simulation; when omitted the chain has two tiers of sizes ``(n, m)``.
    """

    n: int
    m: int
    D: float = 1.0
    lam: float = 0.8
    c: float = 0.0
    gamma: float = 0.0
    tiers: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.tiers is not None:
            object.__setattr__(self, "tiers", tuple(int(t) for t in self.tiers))
            if len(self.tiers) < 2 or self.tiers[0] != self.n or self.tiers[1] != self.m:
                raise ValueError("tiers must start with (n, m)")
            if any(t < 1 for t in self.tiers):
                raise ValueError("tier sizes must be >= 1")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D}")
        # lam == 1 is the no-failure degeneracy; kept admissible on purpose
        if not 0 < self.lam <= 1:
            raise ValueError(f"lambda must lie in (0, 1], got {self.lam}")
        if self.c < 0:
            raise ValueError(f"linking cost must be >= 0, got {self.c}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    @property
    def delta(self) -> float:
        """Total consumer demand."""
        return self.n * self.D

    @property
    def tier_sizes(self) -> tuple[int, ...]:
        return self.tiers if self.tiers is not None else (self.n, self.m)

    @property
    def lambda_r(self) -> float:
        return self.lam

    @property
    def lambda_sup(self) -> tuple[float, ...]:
        return (self.lam,) * self.m

    @property
    def gamma_sup(self) -> tuple[float, ...]:
        return (self.gamma,) * self.m

    def tier_lambdas(self) -> list[tuple[float, ...]]:
        return [(self.lam,) * size for size in self.tier_sizes]

    def tier_gammas(self) -> list[tuple[float, ...]]:
        return [(self.gamma,) * size for size in self.tier_sizes]


@dataclass(frozen=True)
class HeteroParams:
    """Two-tier parameters with per-supplier reliability and congestion cost."""

    n: int
    m: int
    lambda_r: float
    lambda_sup: tuple[float, ...]
    gamma_sup: tuple[float, ...]
    D: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambda_sup", tuple(float(x) for x in self.lambda_sup))
        object.__setattr__(self, "gamma_sup", tuple(float(x) for x in self.gamma_sup))
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if len(self.lambda_sup) != self.m or len(self.gamma_sup) != self.m:
            raise ValueError("lambda_sup and gamma_sup must have length m")
        for x in (self.lambda_r, *self.lambda_sup):
            if not 0 < x <= 1:
                raise ValueError(f"success probabilities must lie in (0, 1], got {x}")
        if any(g < 0 for g in self.gamma_sup):
            raise ValueError("gamma_sup entries must be >= 0")
        if not self.D > 0:
            raise ValueError(f"D must be positive, got {self.D}")
        if self.c < 0:
            raise ValueError(f"linking cost must be >= 0, got {self.c}")

    @classmethod
    def homogeneous(cls, p: ModelParams) -> "HeteroParams":
        return cls(n=p.n, m=p.m, lambda_r=p.lam, lambda_sup=p.lambda_sup,
                   gamma_sup=p.gamma_sup, D=p.D, c=p.c)

    @property
    def delta(self) -> float:
        return self.n * self.D

    @property
    def tier_sizes(self) -> tuple[int, ...]:
        return (self.n, self.m)

    def tier_lambdas(self) -> list[tuple[float, ...]]:
        return [(self.lambda_r,) * self.n, self.lambda_sup]

    def tier_gammas(self) -> list[tuple[float, ...]]:
        return [(0.0,) * self.n, self.gamma_sup]


Params = ModelParams | HeteroParams


@dataclass(frozen=True)
class Network:
    """Out-neighborhoods of every strategic agent, one layer per tier boundary.

    ``layers[t][i]`` is the set of tier-(t+1) agents that agent ``i`` of tier
    ``t`` sources from (0-based tiers and agents). A two-tier network has a
    single layer, exposed as :attr:`links`.
    """

    tiers: tuple[int, ...]
    layers: tuple[tuple[frozenset[int], ...], ...]

    def __post_init__(self):
        if len(self.tiers) < 2:
            raise NetworkError("a network needs at least two tiers")
        if len(self.layers) != len(self.tiers) - 1:
            raise NetworkError(
                f"expected {len(self.tiers) - 1} link layers, got {len(self.layers)}")
        for t, layer in enumerate(self.layers):
            if len(layer) != self.tiers[t]:
                raise NetworkError(
                    f"tier {t + 1} has {self.tiers[t]} agents but {len(layer)} link sets")
            for i, nbrs in enumerate(layer):
                for j in nbrs:
                    if not 0 <= j < self.tiers[t + 1]:
                        raise NetworkError(
                            f"agent {i} of tier {t + 1} links to {j}, outside "
                            f"0..{self.tiers[t + 1] - 1}")

    @property
    def n(self) -> int:
        return self.tiers[0]

    @property
    def m(self) -> int:
        return self.tiers[1]

    @property
    def num_tiers(self) -> int:
        return len(self.tiers)

    @property
    def links(self) -> tuple[frozenset[int], ...]:
        """Retailer out-neighborhoods."""
        return self.layers[0]

    @cached_property
    def out_degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.links)

    @cached_property
    def in_neighbors(self) -> tuple[frozenset[int], ...]:
        """Retailers linked to each supplier."""
        nbrs: list[set[int]] = [set() for _ in range(self.m)]
        for i, s in enumerate(self.links):
            for j in s:
                nbrs[j].add(i)
        return tuple(frozenset(x) for x in nbrs)

    @cached_property
    def in_degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.in_neighbors)

    @cached_property
    def active(self) -> tuple[int, ...]:
        """Retailers with at least one link; every supplier reaches raw materials."""
        return tuple(i for i, d in enumerate(self.out_degrees) if d > 0)

    def overlap(self, i: int, k: int) -> int:
        return len(self.links[i] & self.links[k])

    def with_links(self, i: int, nbrs: Iterable[int]) -> "Network":
        """Copy with retailer ``i`` switched to a new out-neighborhood."""
        layer = list(self.links)
        layer[i] = frozenset(nbrs)
        return Network(self.tiers, (tuple(layer),) + self.layers[1:])

    def profile(self) -> tuple[tuple[int, ...], ...]:
        """Sorted retailer neighborhoods; hashable and stable for reports."""
        return tuple(tuple(sorted(s)) for s in self.links)

    def __str__(self) -> str:
        body = " ".join("{" + ",".join(str(j + 1) for j in nb) + "}" for nb in self.profile())
        return f"[{body}]"


def _as_set(nbrs: Iterable[int], where: str) -> frozenset[int]:
    try:
        items = [operator.index(j) for j in nbrs]
    except TypeError as exc:
        raise NetworkError(f"{where}: supplier indices must be integers") from exc
    if len(set(items)) != len(items):
        raise NetworkError(f"{where}: duplicate supplier index in {items}")
    return frozenset(items)


def build_network(n: int, m: int, links: Sequence[Iterable[int]]) -> Network:
    """Validate a two-tier network given 0-based supplier index sets."""
    if len(links) != n:
        raise NetworkError(f"expected {n} retailer link sets, got {len(links)}")
    layer = tuple(_as_set(s, f"retailer {i}") for i, s in enumerate(links))
    return Network((n, m), (layer,))


def build_multitier(tiers: Sequence[int], layers: Sequence[Sequence[Iterable[int]]]) -> Network:
    """Validate a T-tier network; ``layers[t]`` lists out-neighborhoods of tier t."""
    tiers = tuple(int(t) for t in tiers)
    if len(layers) != len(tiers) - 1:
        raise NetworkError(f"expected {len(tiers) - 1} link layers, got {len(layers)}")
    built = []
    for t, layer in enumerate(layers):
        if len(layer) != tiers[t]:
            raise NetworkError(f"tier {t + 1} has {tiers[t]} agents but {len(layer)} link sets")
        built.append(tuple(_as_set(s, f"tier {t + 1} agent {i}") for i, s in enumerate(layer)))
    return Network(tiers, tuple(built))


def empty_network(n: int, m: int) -> Network:
    return build_network(n, m, [()] * n)


def all_profiles(n: int, m: int) -> Iterable[Network]:
    """Every labeled two-tier network, in deterministic order."""
    subsets = all_subsets(m)
    for combo in itertools.product(subsets, repeat=n):
        yield Network((n, m), (tuple(combo),))


def all_subsets(m: int) -> list[frozenset[int]]:
    """Subsets of ``range(m)`` ordered by size, then lexicographically."""
    out = []
    for k in range(m + 1):
        out.extend(frozenset(c) for c in itertools.combinations(range(m), k))
    return out


# -- 2x2 candidate taxonomy ------------------------------------------------

EMPTY, CONE, PARALLEL, ZEE, FULL, OTHER = "empty", "cone", "parallel", "zee", "full", "other"
CLASS_ORDER = (EMPTY, CONE, PARALLEL, ZEE, FULL, OTHER)


@dataclass(frozen=True)
class NetworkClass:
    """Label of a 2x2 network plus the supplier permutation to canonical form.

    ``witness[j]`` is the canonical label of supplier ``j``. In canonical
    form the cone uses supplier 0 and the zee's shared supplier is 0.
    ``single`` names the single-link retailer of a zee.
    """

    label: str
    witness: tuple[int, ...] | None = None
    single: int | None = None


def classify_2x2(net: Network) -> NetworkClass:
    if net.num_tiers != 2 or net.n != 2 or net.m != 2:
        raise NetworkError(f"classify_2x2 needs a 2x2 network, got {net.n}x{net.m}")
    a, b = net.links
    da, db = len(a), len(b)
    if da == 0 and db == 0:
        return NetworkClass(EMPTY)
    if da == 0 or db == 0:
        return NetworkClass(OTHER)
    if da == 1 and db == 1:
        (ja,), (jb,) = a, b
        if ja == jb:
            return NetworkClass(CONE, _swap_to_zero(ja))
        return NetworkClass(PARALLEL, (0, 1) if ja == 0 else (1, 0))
    if da == 2 and db == 2:
        return NetworkClass(FULL, (0, 1))
    single = 0 if da == 1 else 1
    (shared,) = net.links[single]
    return NetworkClass(ZEE, _swap_to_zero(shared), single=single)


def _swap_to_zero(j: int) -> tuple[int, int]:
    return (0, 1) if j == 0 else (1, 0)


def canonical_2x2() -> dict[str, Network]:
    """Canonical candidate networks; the zee's single-link retailer is 0."""
    return {
        EMPTY: build_network(2, 2, [(), ()]),
        CONE: build_network(2, 2, [(0,), (0,)]),
        PARALLEL: build_network(2, 2, [(0,), (1,)]),
        ZEE: build_network(2, 2, [(0,), (0, 1)]),
        FULL: build_network(2, 2, [(0, 1), (0, 1)]),
    }


def describe(net: Network) -> str:
    """Coarse label usable for any two-tier size.

    Falls back to :func:`classify_2x2` for 2x2 networks; elsewhere
    recognizes the empty, cone (all retailers on one supplier), parallel and
    complete networks.
    """
    if net.num_tiers == 2 and net.n == 2 and net.m == 2:
        return classify_2x2(net).label
    links = net.links
    if all(len(s) == 0 for s in links):
        return EMPTY
    if all(len(s) == 1 for s in links):
        targets = [next(iter(s)) for s in links]
        if len(set(targets)) == 1:
            return CONE
        if len(set(targets)) == len(targets):
            return PARALLEL
    if all(len(s) == net.m for s in links):
        return FULL
    return OTHER


# -- file format -----------------------------------------------------------

def network_from_dict(data: dict) -> Network:
    try:
        links = data["links"]
        if "tiers" in data and data["tiers"] is not None:
            tiers = [int(t) for t in data["tiers"]]
            if len(tiers) == 2 and links and all(
                    isinstance(x, (int, float)) for s in links for x in s):
                links = [links]
            layers = [[[_one_based(j, f"tier {t + 1}") for j in s] for s in layer]
                      for t, layer in enumerate(links)]
            return build_multitier(tiers, layers)
        n, m = int(data["n"]), int(data["m"])
    except (KeyError, TypeError) as exc:
        raise NetworkError(f"malformed network description: {exc}") from exc
    return build_network(n, m, [[_one_based(j, f"retailer {i + 1}") for j in s]
                                for i, s in enumerate(links)])


def _one_based(j, where: str) -> int:
    if isinstance(j, bool) or not isinstance(j, (int, float)) or not float(j).is_integer():
        raise NetworkError(f"{where}: non-integer supplier index {j!r}")
    return int(j) - 1


def network_to_dict(net: Network) -> dict:
    if net.num_tiers == 2:
        return {"n": net.n, "m": net.m,
                "links": [[j + 1 for j in nb] for nb in net.profile()]}
    layers = [[[j + 1 for j in sorted(s)] for s in layer] for layer in net.layers]
    return {"n": net.n, "m": net.m, "tiers": list(net.tiers), "links": layers}


def load_network(path: str | Path) -> Network:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise NetworkError(f"{path}: not valid JSON ({exc})") from exc
    return network_from_dict(data)


def dump_network(net: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(net)) + "\n")

