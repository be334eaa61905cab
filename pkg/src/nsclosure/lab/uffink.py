"""Distilling boxes of the (eps, gamma) section out of Uffink's set."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..box import correlators, make_section_box
from ..geometry import uffink_lhs
from ..wiring import apply_wiring, distillation_wiring


def uffink_quartic(E00, E11):
    """Uffink quantity of the once-distilled box, written in the initial correlators."""
    return 4 * E00 ** 4 + (E00 ** 2 + (E00 - E11 - E11 ** 2 - E00 * E11) / 2) ** 2


def distilled_correlators(eps, gamma) -> tuple:
    """Closed-form correlators ``(E00, E01, E10, E11)`` after one distillation step."""
    s = (eps + gamma) ** 2
    e01 = (s + eps * gamma + gamma ** 2 + eps) / 2
    e11 = -(s + eps * gamma - 3 * gamma ** 2 + eps) / 2
    return s, e01, s, e11


@dataclass(frozen=True)
class RegionPoint:
    i: int
    j: int
    eps: Fraction
    gamma: Fraction
    inside: bool  # initially inside Uffink's set
    first_escape: Optional[int]  # first iteration whose image violates Uffink's inequality


@dataclass
class RegionMap:
    grid: int
    iters: int
    points: list

    def region(self, k: int) -> set:
        """Nodes escaping within ``k`` iterations."""
        return {(p.i, p.j) for p in self.points if p.first_escape is not None and p.first_escape <= k}

    def count(self, k: int) -> int:
        return sum(1 for p in self.points if p.first_escape == k)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "eps", "gamma", "inside", "first_escape"])
            for p in self.points:
                w.writerow([p.i, p.j, f"{float(p.eps):.17g}", f"{float(p.gamma):.17g}",
                            int(p.inside), p.first_escape or 0])


def _scan_row(args):
    grid, iters, i = args
    w = distillation_wiring()
    out = []
    for j in range(grid - i + 1):
        eps, gamma = Fraction(i, grid), Fraction(j, grid)
        box = make_section_box(eps, gamma)
        inside = uffink_lhs(box) <= 4
        first = None
        if inside:
            for k in range(1, iters + 1):
                box = apply_wiring(w, [box, box])
                if uffink_lhs(box) > 4:
                    first = k
                    break
        out.append(RegionPoint(i, j, eps, gamma, inside, first))
    return out


def uffink_escape_scan(grid: int, iters: int, workers: int = 1) -> RegionMap:
    """Label every node ``(i/grid, j/grid)`` of the section simplex by its first escape iteration."""
    if grid < 1 or iters < 1:
        raise ValueError("grid and iters must be positive")
    tasks = [(grid, iters, i) for i in range(grid + 1)]
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            rows = pool.map(_scan_row, tasks)
    else:
        rows = [_scan_row(t) for t in tasks]
    return RegionMap(grid, iters, [p for row in rows for p in row])


def one_step_prediction(eps, gamma) -> bool:
    """Closed-form test: does one distillation step leave Uffink's set?"""
    c = correlators(make_section_box(eps, gamma))
    return uffink_quartic(c.E00, c.E11) > 4
