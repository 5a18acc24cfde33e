"""Phase maps of the 2x2 game: predicted versus enumerated equilibrium classes."""

from __future__ import annotations

import bisect as _bisect
import csv
import io
import math
from collections.abc import Collection, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import enumerate_equilibria
from .model import CLASS_ORDER, CONE, EMPTY, FULL, PARALLEL, ZEE, ModelParams
from .thresholds import (CANDIDATES, GAMMA_HATS, PRINTED_C_MAX, PRINTED_GAMMA_HAT,
                         Thresholds2x2, thresholds_2x2)

PRINTABLE = GAMMA_HATS + ("c_max",)
BOUNDARY_STEPS = 2.0
CSV_HEADER = ("lambda", "gamma", "c", "predicted", "enumerated", "agree")


def predict_2x2(lam: float, gamma: float, c: float = 0.0, D: float = 1.0,
                th: Thresholds2x2 | None = None,
                printed: Collection[str] = ()) -> frozenset[str]:
    """Equilibrium classes implied by the threshold curves.

    Each class is kept when none of its unilateral deviations pays and its
    payoff is non-negative. ``printed`` swaps in published closed forms for
    the named thresholds (``fz1``, ``z2c``, ``pc``, ``pz2``, ``c_max``).
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if gamma < 0 or c < 0:
        raise ValueError("gamma and c must be non-negative")
    unknown = set(printed) - set(PRINTABLE)
    if unknown:
        raise ValueError(f"unknown printed thresholds {sorted(unknown)}")
    th = th or thresholds_2x2(lam, c, D)
    g = {k: PRINTED_GAMMA_HAT[k](lam) if k in printed else th.gamma_hat[k] for k in GAMMA_HATS}
    if "c_max" in printed:
        cap = {k: f(lam, gamma, D) for k, f in PRINTED_C_MAX.items()}
    else:
        cap = th.c_max(gamma)
    ok = {k: c <= cap[k] for k in CANDIDATES}

    out = {EMPTY}
    if ok["cone"] and gamma <= g["z2c"] and gamma <= g["pc"]:
        out.add(CONE)
    if ok["parallel"] and gamma >= g["pc"] and gamma >= g["pz2"]:
        out.add(PARALLEL)
    if ok["zee1"] and ok["zee2"] and g["z2c"] <= gamma <= g["fz1"] and gamma <= g["pz2"]:
        out.add(ZEE)
    if ok["full"] and gamma >= g["fz1"]:
        out.add(FULL)
    return frozenset(out)


def enumerate_2x2(lam: float, gamma: float, c: float = 0.0, D: float = 1.0) -> frozenset[str]:
    report = enumerate_equilibria(ModelParams(n=2, m=2, D=D, lam=lam, c=c, gamma=gamma))
    return frozenset(report.classes)


def format_classes(classes: Collection[str]) -> str:
    return "+".join(k for k in CLASS_ORDER if k in classes)


@dataclass(frozen=True)
class GridSpec:
    """Sweep grid; gammas are absolute unless ``relative``, then fractions of
    the parallel network's congestion bound at each lambda."""

    lambdas: tuple[float, ...]
    gammas: tuple[float, ...]
    cs: tuple[float, ...] = (0.0,)
    relative: bool = False
    D: float = 1.0

    def __post_init__(self):
        if not self.lambdas or not self.gammas or not self.cs:
            raise ValueError("grid must have at least one lambda, gamma and c")
        if any(not 0 < l < 1 for l in self.lambdas):
            raise ValueError("grid lambdas must lie in (0, 1)")
        if any(g < 0 for g in self.gammas) or any(c < 0 for c in self.cs):
            raise ValueError("grid gammas and costs must be non-negative")

    @classmethod
    def linear(cls, lam_range: tuple[float, float], n_lam: int,
               gamma_range: tuple[float, float] | None = None, n_gamma: int = 10,
               cs: Sequence[float] = (0.0,), relative: bool = False, D: float = 1.0) -> "GridSpec":
        """Evenly spaced grid. With ``relative`` and no range, gammas are the
        interior points k/(n_gamma+1) of the open interval (0, 1)."""
        lams = np.linspace(lam_range[0], lam_range[1], n_lam)
        if gamma_range is None:
            if not relative:
                raise ValueError("absolute grids need a gamma range")
            gams = np.arange(1, n_gamma + 1) / (n_gamma + 1)
        else:
            gams = np.linspace(gamma_range[0], gamma_range[1], n_gamma)
        return cls(tuple(float(x) for x in lams), tuple(float(x) for x in gams),
                   tuple(float(x) for x in cs), relative, D)


@dataclass(frozen=True)
class PhaseCell:
    lam: float
    gamma: float
    c: float
    predicted: frozenset[str]
    enumerated: frozenset[str]
    distance: float

    @property
    def agree(self) -> bool:
        return self.predicted == self.enumerated

    @property
    def near_boundary(self) -> bool:
        return self.distance <= BOUNDARY_STEPS


def _step(values: Sequence[float], default: float) -> float:
    if len(values) < 2:
        return default
    return float(np.median(np.diff(sorted(values))))


def _curves(th: Thresholds2x2) -> list[float]:
    return [th.gamma_hat[k] for k in GAMMA_HATS] + [th.gamma_feasible[k] for k in CANDIDATES]


def _fine_lambdas(lams: Sequence[float], dlam: float, per_step: int = 8, pad: int = 3) -> list[float]:
    pts = set(lams)
    lo, hi = min(lams) - pad * dlam, max(lams) + pad * dlam
    k = math.floor((lo - min(lams)) / dlam * per_step)
    while True:
        x = min(lams) + k * dlam / per_step
        if x > hi:
            break
        if 0 < x < 1:
            pts.add(x)
        k += 1
    return sorted(pts)


def _column(args) -> list[PhaseCell]:
    lam, c, gammas, dgam, dlam, fine, D, printed = args
    th = thresholds_2x2(lam, c, D)
    cells = []
    for gamma in gammas:
        dist = math.inf
        for lam2, curve in fine:
            dl = abs(lam2 - lam) / dlam
            if dl >= dist:
                continue
            for f in curve:
                dist = min(dist, max(dl, abs(gamma - f) / dgam))
        cells.append(PhaseCell(lam, gamma, c, predict_2x2(lam, gamma, c, D, th, printed),
                               enumerate_2x2(lam, gamma, c, D), dist))
    return cells


def sweep(spec: GridSpec, jobs: int = 1, printed: Collection[str] = ()) -> list[PhaseCell]:
    """Evaluate every grid cell; output order is c, then lambda, then gamma.

    ``printed`` is passed to :func:`predict_2x2` for every cell.
    """
    printed = tuple(printed)
    unknown = set(printed) - set(PRINTABLE)
    if unknown:
        raise ValueError(f"unknown printed thresholds {sorted(unknown)}")
    lams = sorted(spec.lambdas)
    dlam = _step(lams, 0.01)
    fine_l = _fine_lambdas(lams, dlam)
    tasks = []
    for c in spec.cs:
        fine = [(l, _curves(thresholds_2x2(l, c, spec.D))) for l in fine_l]
        for lam in lams:
            # only curve samples within a few lambda steps can be nearest
            lo = _bisect.bisect_left(fine_l, lam - 3 * dlam)
            hi = _bisect.bisect_right(fine_l, lam + 3 * dlam)
            if spec.relative:
                scale = thresholds_2x2(lam, 0.0, spec.D).gamma_max["parallel"]
                gammas = [f * scale for f in spec.gammas]
            else:
                gammas = list(spec.gammas)
            dgam = _step(gammas, 1e-3)
            tasks.append((lam, c, gammas, dgam, dlam, fine[lo:hi], spec.D, printed))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            columns = list(pool.map(_column, tasks))
    else:
        columns = [_column(t) for t in tasks]
    return [cell for col in columns for cell in col]


@dataclass
class PrintedContradiction:
    """Cells where swapping one printed threshold in breaks agreement."""

    threshold: str
    cells: list[PhaseCell]

    @property
    def count(self) -> int:
        return len(self.cells)

    def band(self) -> dict[str, tuple[float, float]] | None:
        if not self.cells:
            return None
        return {"lambda": (min(x.lam for x in self.cells), max(x.lam for x in self.cells)),
                "gamma": (min(x.gamma for x in self.cells), max(x.gamma for x in self.cells))}


@dataclass
class ReconcileReport:
    disagreements: list[PhaseCell]
    indeterminate: list[PhaseCell]
    printed: dict[str, PrintedContradiction] = field(default_factory=dict)
    cells: int = 0

    @property
    def contradicted(self) -> list[str]:
        return [k for k, v in self.printed.items() if v.count]


def reconcile(cells: Sequence[PhaseCell], D: float = 1.0, tol_steps: float = BOUNDARY_STEPS,
              check_printed: Collection[str] = PRINTABLE) -> ReconcileReport:
    """Split disagreements by boundary distance and test each printed threshold.

    A printed threshold is contradicted at a cell when the solved prediction
    matches enumeration there but the prediction using that printed form
    does not.
    """
    disagree = [x for x in cells if not x.agree and x.distance > tol_steps]
    fuzzy = [x for x in cells if not x.agree and x.distance <= tol_steps]
    cache: dict[tuple[float, float], Thresholds2x2] = {}
    printed = {k: PrintedContradiction(k, []) for k in check_printed}
    for cell in cells:
        if not cell.agree:
            continue
        key = (cell.lam, cell.c)
        if key not in cache:
            cache[key] = thresholds_2x2(cell.lam, cell.c, D)
        for k in check_printed:
            alt = predict_2x2(cell.lam, cell.gamma, cell.c, D, cache[key], printed={k})
            if alt != cell.enumerated:
                printed[k].cells.append(cell)
    return ReconcileReport(disagree, fuzzy, printed, len(cells))


def cells_to_csv(cells: Sequence[PhaseCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for x in cells:
        w.writerow([f"{x.lam:.12g}", f"{x.gamma:.12g}", f"{x.c:.12g}",
                    format_classes(x.predicted), format_classes(x.enumerated),
                    "true" if x.agree else "false"])
    return buf.getvalue()


def cells_from_csv(text: str) -> list[tuple[float, float, float, frozenset, frozenset, bool]]:
    rows = list(csv.DictReader(io.StringIO(text)))
    parse = lambda s: frozenset(s.split("+")) if s else frozenset()
    return [(float(r["lambda"]), float(r["gamma"]), float(r["c"]), parse(r["predicted"]),
             parse(r["enumerated"]), r["agree"] == "true") for r in rows]
