"""Feasibility bounds and preference thresholds of the 2x2 game.

Every threshold is obtained by root-finding on payoffs of the canonical
candidate networks as evaluated by :func:`scn.analytic.payoff_congestion`.
The closed forms published alongside the model are kept in
``PRINTED_*`` tables and compared against the solved values, because
several of them do not agree with the payoffs they are derived from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

from .analytic import payoff_congestion
from .model import CONE, FULL, PARALLEL, ZEE, ModelParams, canonical_2x2

CANDIDATES = ("cone", "parallel", "zee1", "zee2", "full")
LINKS = {"cone": 1, "parallel": 1, "zee1": 1, "zee2": 2, "full": 2}
GAMMA_HATS = ("fz1", "z2c", "pc", "pz2")
# each threshold is the root of first-payoff minus second-payoff in gamma
GAMMA_HAT_PAIRS = {"fz1": ("full", "zee1"), "z2c": ("zee2", "cone"),
                   "pc": ("parallel", "cone"), "pz2": ("parallel", "zee2")}
BISECT_TOL = 1e-12
DISCREPANCY_TOL = 1e-9

_NETS = canonical_2x2()
_SLOTS = {"cone": (CONE, 0), "parallel": (PARALLEL, 0), "zee1": (ZEE, 0),
          "zee2": (ZEE, 1), "full": (FULL, 0)}

_SQ5, _SQ2, _SQ17 = math.sqrt(5), math.sqrt(2), math.sqrt(17)

PRINTED_PAYOFF: dict[str, Callable[[float, float, float, float], float]] = {
    "cone": lambda l, g, c, D: l * (l ** 3 - 2 * l ** 2 + 1 - 3.5 * g) * D ** 2 - c,
    "parallel": lambda l, g, c, D: l * (-l ** 3 + 2 * l - 1 - 0.5 * g) * D ** 2 - c,
    "zee1": lambda l, g, c, D: 0.5 * l * (-l ** 3 - l ** 2 + 3 * l - 1 - 2.25 * g) * D ** 2 - c,
    "zee2": lambda l, g, c, D: 0.5 * l * (-l ** 3 - 2 * l ** 2 + 5 * l - 2 - 1.25 * g) * D ** 2 - 2 * c,
    "full": lambda l, g, c, D: 0.5 * l * (-l ** 3 - 2 * l ** 2 + 5 * l - 2 - g) * D ** 2 - 2 * c,
}

PRINTED_GAMMA_MAX: dict[str, Callable[[float], float]] = {
    "cone": lambda l: 2 / 7 * (1 - l) * ((_SQ5 + 1) / 2 - l) * ((_SQ5 - 1) / 2 + l),
    "parallel": lambda l: 2 * (1 - l) * (l + (_SQ5 + 1) / 2) * (l - (_SQ5 - 1) / 2),
    "zee1": lambda l: 4 / 9 * (1 - l) * (l + _SQ2 + 1) * (l - (_SQ2 - 1)),
    "zee2": lambda l: 4 / 5 * (1 - l) * (l + (_SQ17 + 3) / 2) * (l - (_SQ17 - 3) / 2),
    "full": lambda l: (1 - l) * (l + (_SQ17 + 3) / 2) * (l - (_SQ17 - 3) / 2),
}

PRINTED_C_MAX: dict[str, Callable[[float, float, float], float]] = {
    "cone": lambda l, g, D: l * (l ** 3 - 2 * l ** 2 + 1 - 3.5 * g) * D ** 2,
    # printed with 2*l**2 where the candidate payoff has 2*l
    "parallel": lambda l, g, D: l * (-l ** 3 + 2 * l ** 2 - 1 - 0.5 * g) * D ** 2,
    "zee1": lambda l, g, D: 0.5 * l * (-l ** 3 - l ** 2 + 3 * l - 1 - 2.25 * g) * D ** 2,
    "zee2": lambda l, g, D: 0.25 * l * (-l ** 3 - 2 * l ** 2 + 5 * l - 2 - 1.25 * g) * D ** 2,
    "full": lambda l, g, D: 0.25 * l * (-l ** 3 - 2 * l ** 2 + 5 * l - 2 - g) * D ** 2,
}

PRINTED_GAMMA_HAT: dict[str, Callable[[float], float]] = {
    "fz1": lambda l: 0.8 * (1 - l) ** 2,
    "z2c": lambda l: 4 / 23 * (1 - l) ** 2 * (3 * l + 4),
    "pc": lambda l: 2 / 3 * (1 - l) ** 2 * (l + 1),
    "pz2": lambda l: l * (1 - l) ** 2,
}

PRINTED_LAMBDA_MIN = {
    "cone": 0.0,
    "parallel": (_SQ5 - 1) / 2,
    "zee1": _SQ2 - 1,
    "zee2": (_SQ17 - 3) / 2,
    "full": (_SQ17 - 3) / 2,
}


def bisect(f: Callable[[float], float], lo: float, hi: float,
           tol: float = BISECT_TOL, max_iter: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]``; the endpoints must bracket a sign change."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_root(f: Callable[[float], float], lo: float = 0.0, hi: float = 1.0,
              limit: float = 1e6) -> float:
    """Bisection after widening ``[lo, hi]`` symmetrically until it brackets a root.

    Returns ``nan`` when no sign change appears before ``limit``.
    """
    flo, fhi = f(lo), f(hi)
    while (flo > 0) == (fhi > 0) and flo != 0 and fhi != 0:
        width = hi - lo
        if width > limit:
            return math.nan
        lo, hi = lo - width, hi + width
        flo, fhi = f(lo), f(hi)
    return bisect(f, lo, hi)


def candidate_payoff(name: str, lam: float, gamma: float, c: float = 0.0, D: float = 1.0) -> float:
    """Retailer payoff in a canonical candidate network; ``gamma`` may be negative."""
    key, who = _SLOTS[name]
    p = _params(lam, gamma, c, D)
    return payoff_congestion(_NETS[key], p, who)


class _Unchecked(ModelParams):
    """ModelParams without validation, so root brackets may cross gamma < 0."""

    def __post_init__(self):
        pass


def _params(lam, gamma, c, D):
    return _Unchecked(n=2, m=2, D=D, lam=lam, c=c, gamma=gamma)


def candidate_payoffs(lam: float, gamma: float, c: float = 0.0, D: float = 1.0) -> dict[str, float]:
    return {k: candidate_payoff(k, lam, gamma, c, D) for k in CANDIDATES}


def printed_candidate_payoffs(lam: float, gamma: float, c: float = 0.0,
                              D: float = 1.0) -> dict[str, float]:
    return {k: f(lam, gamma, c, D) for k, f in PRINTED_PAYOFF.items()}


def solve_gamma_hat(name: str, lam: float, c: float = 0.0, D: float = 1.0) -> float:
    a, b = GAMMA_HAT_PAIRS[name]
    return find_root(lambda g: candidate_payoff(a, lam, g, c, D) - candidate_payoff(b, lam, g, c, D),
                     0.0, 1.0)


def solve_gamma_feasible(name: str, lam: float, c: float = 0.0, D: float = 1.0) -> float:
    """Congestion level at which ``name``'s payoff reaches zero at linking cost ``c``."""
    return find_root(lambda g: candidate_payoff(name, lam, g, c, D), 0.0, 1.0)


@lru_cache(maxsize=None)
def solved_lambda_min(name: str) -> float:
    """Smallest lambda in (0, 1) above which the candidate payoff at gamma = c = 0 is positive."""
    f = lambda l: candidate_payoff(name, l, 0.0)
    grid = [k / 1000 for k in range(1, 1000)]
    prev = grid[0]
    if f(prev) > 0:
        return 0.0
    for l in grid[1:]:
        if f(l) > 0:
            return bisect(f, prev, l)
        prev = l
    return math.nan


@dataclass(frozen=True)
class Thresholds2x2:
    """Solved and printed thresholds at one ``(lambda, c, D)``.

    ``gamma_max`` bounds congestion for non-negative payoff at zero linking
    cost; ``gamma_feasible`` is the same bound at the given ``c``.
    ``gamma_hat`` curves are solved at the given ``c``;
    ``gamma_hat_c0`` at ``c = 0`` for reconciliation with the printed forms.
    """

    lam: float
    c: float
    D: float
    gamma_max: dict[str, float]
    gamma_feasible: dict[str, float]
    gamma_hat: dict[str, float]
    gamma_hat_c0: dict[str, float]
    gamma_hat_residual: dict[str, float]
    gamma_max_printed: dict[str, float] = field(default_factory=dict)
    gamma_hat_printed: dict[str, float] = field(default_factory=dict)

    @property
    def lambda_min(self) -> dict[str, float]:
        return {k: solved_lambda_min(k) for k in CANDIDATES}

    @property
    def lambda_min_printed(self) -> dict[str, float]:
        return dict(PRINTED_LAMBDA_MIN)

    def c_max(self, gamma: float) -> dict[str, float]:
        """Largest linking cost keeping each candidate's payoff non-negative."""
        return {k: candidate_payoff(k, self.lam, gamma, 0.0, self.D) / LINKS[k]
                for k in CANDIDATES}

    def c_max_printed(self, gamma: float) -> dict[str, float]:
        return {k: f(self.lam, gamma, self.D) for k, f in PRINTED_C_MAX.items()}

    @property
    def gamma_hat_discrepancy(self) -> dict[str, bool]:
        return {k: not abs(self.gamma_hat_c0[k] - self.gamma_hat_printed[k]) <= DISCREPANCY_TOL
                for k in GAMMA_HATS}

    @property
    def gamma_max_discrepancy(self) -> dict[str, bool]:
        return {k: not abs(self.gamma_max[k] - self.gamma_max_printed[k]) <= DISCREPANCY_TOL
                for k in CANDIDATES}

    def c_max_discrepancy(self, gamma: float = 0.0) -> dict[str, bool]:
        solved, printed = self.c_max(gamma), self.c_max_printed(gamma)
        return {k: not abs(solved[k] - printed[k]) <= DISCREPANCY_TOL for k in CANDIDATES}

    @property
    def lambda_min_discrepancy(self) -> dict[str, bool]:
        solved = self.lambda_min
        return {k: not abs(solved[k] - PRINTED_LAMBDA_MIN[k]) <= 1e-9 for k in CANDIDATES}

    def ordering_holds(self) -> bool:
        g = self.gamma_hat
        return g["fz1"] < g["z2c"] < g["pc"] < g["pz2"]


def thresholds_2x2(lam: float, c: float = 0.0, D: float = 1.0) -> Thresholds2x2:
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if c < 0 or not D > 0:
        raise ValueError("need c >= 0 and D > 0")
    hat = {k: solve_gamma_hat(k, lam, c, D) for k in GAMMA_HATS}
    hat0 = hat if c == 0 else {k: solve_gamma_hat(k, lam, 0.0, D) for k in GAMMA_HATS}
    residual = {}
    for k, (a, b) in GAMMA_HAT_PAIRS.items():
        residual[k] = abs(candidate_payoff(a, lam, hat[k], c, D) - candidate_payoff(b, lam, hat[k], c, D))
    gmax = {k: solve_gamma_feasible(k, lam, 0.0, D) for k in CANDIDATES}
    gfeas = gmax if c == 0 else {k: solve_gamma_feasible(k, lam, c, D) for k in CANDIDATES}
    return Thresholds2x2(
        lam=lam, c=c, D=D, gamma_max=gmax, gamma_feasible=gfeas, gamma_hat=hat,
        gamma_hat_c0=hat0, gamma_hat_residual=residual,
        gamma_max_printed={k: f(lam) for k, f in PRINTED_GAMMA_MAX.items()},
        gamma_hat_printed={k: f(lam) for k, f in PRINTED_GAMMA_HAT.items()},
    )


def gamma_hat_crossings(c: float, D: float = 1.0, lo: float = 0.01, hi: float = 0.99,
                        steps: int = 400) -> list[dict]:
    """Points in lambda where two solved gamma-hat curves meet at linking cost ``c``.

    The curves' common intersection is only described graphically for
    ``c > 0``; this scans for sign changes of every pairwise difference.
    """
    grid = [lo + (hi - lo) * k / steps for k in range(steps + 1)]
    curves = {l: {k: solve_gamma_hat(k, l, c, D) for k in GAMMA_HATS} for l in grid}
    out = []
    names = list(GAMMA_HATS)
    for a_idx, a in enumerate(names):
        for b in names[a_idx + 1:]:
            diff = lambda l: solve_gamma_hat(a, l, c, D) - solve_gamma_hat(b, l, c, D)
            for l0, l1 in zip(grid, grid[1:]):
                d0 = curves[l0][a] - curves[l0][b]
                d1 = curves[l1][a] - curves[l1][b]
                if d0 == 0 or (d0 > 0) != (d1 > 0):
                    root = bisect(diff, l0, l1)
                    out.append({"curves": (a, b), "lambda": root,
                                "gamma": solve_gamma_hat(a, root, c, D)})
    return out
