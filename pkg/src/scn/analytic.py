"""Closed-form expected payoffs and overlap/congestion statistics.

All functions take two-tier networks. Peers are restricted to active
retailers, so partially active networks need no special handling.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import HeteroParams, ModelParams, Network, Params


class UndefinedRegimeError(ValueError):
    """A regime quantity was requested where its defining formula divides by zero."""


def _require_two_tier(net: Network) -> None:
    if net.num_tiers != 2:
        raise ValueError("closed-form payoffs exist only for two-tier networks")


def rho(net: Network, i: int) -> float:
    """Relative overlap of retailer ``i``'s suppliers with its active peers'."""
    mine = net.links[i]
    if not mine:
        return 0.0
    deg = net.out_degrees
    return sum(len(mine & net.links[k]) / deg[k] for k in net.active if k != i)


def congestion(net: Network, j: int, exclude: int | None = None) -> float:
    """Demand-share load at supplier ``j``, optionally without retailer ``exclude``."""
    deg = net.out_degrees
    return sum(1.0 / deg[i] for i in net.in_neighbors[j] if i != exclude)


def _base_term(net: Network, p: ModelParams) -> float:
    lam, D = p.lam, p.D
    n_active = len(net.active)
    return lam * (1 - lam) * D * (lam * D * ((1 + lam) * n_active - lam) - p.delta)


def payoff_no_congestion(net: Network, p: ModelParams, i: int) -> float:
    """Expected retailer payoff with the congestion penalty switched off."""
    _require_two_tier(net)
    d = net.out_degrees[i]
    if d == 0:
        return 0.0
    lam, D = p.lam, p.D
    return (_base_term(net, p)
            + lam * (1 - lam) ** 2 * D ** 2 * (1 + (1 + lam) * rho(net, i)) / d
            - p.c * d)


def payoff_congestion(net: Network, p: ModelParams, i: int) -> float:
    """Expected retailer payoff including the quadratic congestion penalty."""
    _require_two_tier(net)
    d = net.out_degrees[i]
    if d == 0:
        return 0.0
    lam, D, g = p.lam, p.D, p.gamma
    scale = lam * D ** 2 / d
    total = _base_term(net, p) + scale * ((1 - lam) ** 2 - g / (2 * d)) - p.c * d
    slope = (1 - lam) * (1 - lam ** 2) - g / d
    for j in net.links[i]:
        f = congestion(net, j, exclude=i)
        total += scale * f * (slope - 0.5 * g * f)
    return total


def payoff_hetero_retailer(net: Network, h: Params, i: int) -> float:
    """Expected retailer payoff with per-supplier reliability and congestion cost.

    The own-retailer term of the double sum carries ``1 - lambda_r`` (from
    E[omega^2] = lambda_r), the cross terms ``1 - lambda_r**2``; with equal
    supplier parameters this reproduces :func:`payoff_congestion` exactly.
    """
    _require_two_tier(net)
    d = net.out_degrees[i]
    if d == 0:
        return 0.0
    lam_sup, gam_sup, lr, D = h.lambda_sup, h.gamma_sup, h.lambda_r, h.D
    deg = net.out_degrees
    mine = net.links[i]
    mean_lam = {k: sum(lam_sup[j] for j in net.links[k]) / deg[k] for k in net.active}

    cross = 0.0
    for k in net.active:
        shared = mine & net.links[k]
        sigma = sum(lam_sup[j] * (1 - lam_sup[j]) for j in shared) / (d * deg[k])
        weight = (1 - lr) if k == i else (1 - lr ** 2)
        cross += weight * (mean_lam[i] * mean_lam[k] + sigma)

    penalty = D ** 2 / (2 * d) * sum(
        gam_sup[j] * lam_sup[j] * congestion(net, j) ** 2 for j in mine)
    return (D ** 2 * cross - h.delta * (1 - lr) * D * mean_lam[i]
            - h.c * d - penalty)


def payoff_hetero_supplier(net: Network, h: Params, j: int) -> float:
    """Expected payoff of (non-strategic) supplier ``j``."""
    _require_two_tier(net)
    D = h.D
    demand = [D * congestion(net, k) for k in range(net.m)]
    if demand[j] == 0:
        return 0.0
    lam_sup = h.lambda_sup
    others = sum(lam_sup[k] * demand[k] for k in range(net.m) if k != j)
    upstream_gap = h.delta - len(net.active) * D
    return demand[j] * (lam_sup[j] * (h.delta - demand[j] - others) - upstream_gap)


def expected_payoff(net: Network, params: Params, i: int) -> float:
    """Retailer payoff under whichever parameter family ``params`` belongs to."""
    if isinstance(params, HeteroParams):
        return payoff_hetero_retailer(net, params, i)
    return payoff_congestion(net, params, i)


def retailer_payoffs(net: Network, params: Params) -> list[float]:
    return [expected_payoff(net, params, i) for i in range(net.n)]


def supplier_payoffs(net: Network, params: Params) -> list[float]:
    return [payoff_hetero_supplier(net, params, j) for j in range(net.m)]


# -- regime quantities ---------------------------------------------------

def d_hat(lam: float, D: float, c: float) -> float:
    """Optimal out-degree in the high-congestion regime (real-valued)."""
    if c <= 0:
        raise UndefinedRegimeError("optimal out-degree needs c > 0")
    return lam * (1 - lam) * D / c ** 0.5


def f_hat(lam: float, gamma: float, d: float) -> float:
    """Payoff-maximizing foreign congestion at a supplier for out-degree ``d``."""
    if gamma <= 0:
        raise UndefinedRegimeError("optimal foreign congestion needs gamma > 0")
    return max(0.0, (1 - lam) * (1 - lam ** 2) / gamma - 1.0 / d)


def low_gamma_threshold(lam: float, n: int) -> float:
    return (1 - lam) * (1 - lam ** 2) / n


def lambda_hat(lam1: float, lam2: float, lam_r: float, gamma: float) -> float:
    """Own-supplier reliability optimum quoted for the heterogeneous 2x2 parallel network."""
    return lam1 + lam2 + 1 - 2 / (1 + lam_r) - gamma / (2 * (1 - lam_r ** 2))


@dataclass(frozen=True)
class RegimeQuantities:
    lam: float
    gamma: float
    D: float
    c: float
    n: int
    low_gamma_threshold: float

    @property
    def d_hat(self) -> float:
        return d_hat(self.lam, self.D, self.c)

    def f_hat(self, d: float) -> float:
        return f_hat(self.lam, self.gamma, d)

    @staticmethod
    def lambda_hat(lam1: float, lam2: float, lam_r: float, gamma: float) -> float:
        return lambda_hat(lam1, lam2, lam_r, gamma)


def regime_quantities(p: ModelParams) -> RegimeQuantities:
    return RegimeQuantities(lam=p.lam, gamma=p.gamma, D=p.D, c=p.c, n=p.n,
                            low_gamma_threshold=low_gamma_threshold(p.lam, p.n))
