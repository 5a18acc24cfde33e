"""Monte Carlo simulation of production failures on T-tier networks.

Sampling is vectorized over draws. Estimates are built from fixed-size
blocks, each seeded from ``SeedSequence(seed, spawn_key=(block,))``, so an
estimate depends only on ``(seed, samples)`` and never on how many worker
processes computed it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model import Network, Params

BLOCK = 1 << 14


@dataclass(frozen=True)
class _Arrays:
    incidence: list[np.ndarray]     # per layer, shape (n_t, n_{t+1})
    degrees: list[np.ndarray]       # out-degree per agent, per strategic tier
    demand: list[np.ndarray]        # D_{t,i}, per tier
    lambdas: list[np.ndarray]
    gammas: list[np.ndarray]
    delta: float
    c: float


def _prepare(net: Network, params: Params) -> _Arrays:
    if tuple(params.tier_sizes) != tuple(net.tiers):
        raise ValueError(f"parameter tiers {params.tier_sizes} do not match network {net.tiers}")
    incidence, degrees = [], []
    for t, layer in enumerate(net.layers):
        a = np.zeros((net.tiers[t], net.tiers[t + 1]))
        for i, nbrs in enumerate(layer):
            a[i, list(nbrs)] = 1.0
        incidence.append(a)
        degrees.append(a.sum(axis=1))
    demand = [np.full(net.tiers[0], float(params.D))]
    for a, d in zip(incidence, degrees):
        share = np.divide(demand[-1], d, out=np.zeros_like(d), where=d > 0)
        demand.append(share @ a)
    return _Arrays(incidence, degrees, demand,
                   [np.asarray(x, dtype=float) for x in params.tier_lambdas()],
                   [np.asarray(x, dtype=float) for x in params.tier_gammas()],
                   float(params.delta), float(params.c))


def _propagate(arr: _Arrays, omega: list[np.ndarray]) -> dict:
    """Push realized quantities down the chain for a batch of failure draws.

    ``omega[t]`` has shape (samples, n_t). Returns realized demands,
    supplies, prices and payoffs, each as a per-tier list of 2-D arrays
    (prices are (samples, T+1)).
    """
    T = len(arr.demand)
    batch = omega[0].shape[0]
    R = [None] * T
    R[T - 1] = np.broadcast_to(arr.demand[T - 1], (batch, arr.demand[T - 1].size)).copy()
    for t in range(T - 2, -1, -1):
        up_demand = arr.demand[t + 1]
        delivered = omega[t + 1] * np.divide(R[t + 1], up_demand, out=np.zeros_like(R[t + 1]),
                                              where=up_demand > 0)
        d = arr.degrees[t]
        per_link = np.divide(arr.demand[t], d, out=np.zeros_like(d), where=d > 0)
        R[t] = (delivered @ arr.incidence[t].T) * per_link
    S = [w * r for w, r in zip(omega, R)]

    prices = np.empty((batch, T + 1))
    prices[:, 0] = arr.delta - S[0].sum(axis=1)
    for t in range(1, T):
        # market clearing: tier t+1 supplies exactly what tier t receives
        prices[:, t] = arr.delta - R[t - 1].sum(axis=1)
    prices[:, T] = arr.delta - R[T - 1].sum(axis=1)

    payoffs = []
    for t in range(T):
        pi = S[t] * prices[:, [t]] - R[t] * prices[:, [t + 1]]
        if t < T - 1:
            d = arr.degrees[t]
            sq = arr.gammas[t + 1] / 2 * S[t + 1] ** 2
            penalty = np.divide(sq @ arr.incidence[t].T, d, out=np.zeros((batch, d.size)),
                                where=d > 0)
            pi = pi - arr.c * d - penalty
        payoffs.append(pi)
    return {"R": R, "S": S, "prices": prices, "payoffs": payoffs}


def _draw(arr: _Arrays, rng: np.random.Generator, batch: int) -> list[np.ndarray]:
    return [(rng.random((batch, lam.size)) < lam).astype(float) for lam in arr.lambdas]


@dataclass(frozen=True)
class Realization:
    """One sampled state of the chain; lists are indexed by tier (0 = retailers)."""

    omega: list[np.ndarray]
    demand: list[np.ndarray]
    realized: list[np.ndarray]
    supply: list[np.ndarray]
    prices: np.ndarray
    payoffs: list[np.ndarray]

    @property
    def tier_supply(self) -> np.ndarray:
        return np.array([s.sum() for s in self.supply])


def realize(net: Network, params: Params, rng: np.random.Generator | None = None,
            omega: list | None = None) -> Realization:
    """Sample (or take as given) success indicators and evaluate one realization."""
    arr = _prepare(net, params)
    if omega is None:
        if rng is None:
            raise ValueError("need either rng or omega")
        om = _draw(arr, rng, 1)
    else:
        om = [np.asarray(w, dtype=float).reshape(1, -1) for w in omega]
        if [w.shape[1] for w in om] != list(net.tiers):
            raise ValueError("omega must give one indicator per agent per tier")
    out = _propagate(arr, om)
    return Realization(omega=[w[0] for w in om], demand=[d.copy() for d in arr.demand],
                       realized=[r[0] for r in out["R"]], supply=[s[0] for s in out["S"]],
                       prices=out["prices"][0], payoffs=[p[0] for p in out["payoffs"]])


@dataclass(frozen=True)
class PayoffEstimate:
    """Per-agent sample means and standard errors, indexed by tier."""

    mean: list[np.ndarray]
    stderr: list[np.ndarray]
    samples: int
    seed: int

    @property
    def retailer_mean(self) -> np.ndarray:
        return self.mean[0]

    @property
    def retailer_stderr(self) -> np.ndarray:
        return self.stderr[0]


def _block_stats(net: Network, params: Params, seed: int, block: int, size: int):
    arr = _prepare(net, params)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    pay = _propagate(arr, _draw(arr, rng, size))["payoffs"]
    # shifting by the first draw keeps constant columns exact
    means = [p[0] + (p - p[0]).mean(axis=0) for p in pay]
    m2 = [((p - mu) ** 2).sum(axis=0) for p, mu in zip(pay, means)]
    return size, means, m2


def _combine(parts):
    """Merge (count, mean, M2) block summaries in order (Chan et al.)."""
    count, mean, m2 = parts[0]
    mean, m2 = [x.copy() for x in mean], [x.copy() for x in m2]
    for nb, mb, qb in parts[1:]:
        total = count + nb
        for t in range(len(mean)):
            delta = mb[t] - mean[t]
            mean[t] += delta * nb / total
            m2[t] += qb[t] + delta ** 2 * count * nb / total
        count = total
    return count, mean, m2


def estimate_payoffs(net: Network, params: Params, samples: int, seed: int = 0,
                     jobs: int = 1) -> PayoffEstimate:
    """Estimate every agent's expected payoff from ``samples`` i.i.d. realizations."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [BLOCK] * (samples // BLOCK)
    if samples % BLOCK:
        sizes.append(samples % BLOCK)
    tasks = [(net, params, seed, b, size) for b, size in enumerate(sizes)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_block_stats_star, tasks))
    else:
        parts = [_block_stats(*task) for task in tasks]
    count, mean, m2 = _combine(parts)
    if count > 1:
        stderr = [np.sqrt(q / (count - 1)) / math.sqrt(count) for q in m2]
    else:
        stderr = [np.full_like(mu, np.nan) for mu in mean]
    return PayoffEstimate(mean=mean, stderr=stderr, samples=count, seed=seed)


def _block_stats_star(task):
    return _block_stats(*task)


