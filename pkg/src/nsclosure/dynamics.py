"""Wiring protocols as discrete maps on 2D sections of the polytope (floating point)."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .box import Box, coordinates, make_local_deterministic, make_maximally_mixed, make_pr
from .geometry import exact_rank
from .wiring import Wiring, and_wiring, distillation_wiring, wire_tables

ATTRACTING, REPELLING, MARGINAL = "attracting", "repelling", "marginal"


@dataclass(frozen=True)
class Section2D:
    """Affine frame ``(u, v) -> (1-u-v) B0 + u B1 + v B2``."""

    b0: Box
    b1: Box
    b2: Box
    name: str = ""

    def __post_init__(self):
        c0 = coordinates(self.b0.p)
        diffs = [[a - b for a, b in zip(coordinates(bx.p), c0)] for bx in (self.b1, self.b2)]
        if exact_rank(diffs) != 2:
            raise ValueError("section frame boxes are not affinely independent")

    @cached_property
    def _arrays(self):
        return [np.array([float(v) for v in b.p]) for b in (self.b0, self.b1, self.b2)]

    def table(self, u: float, v: float) -> np.ndarray:
        t0, t1, t2 = self._arrays
        return (1 - u - v) * t0 + u * t1 + v * t2

    @cached_property
    def _frame(self):
        c0, c1, c2 = (np.array([float(c) for c in coordinates(b.p)]) for b in (self.b0, self.b1, self.b2))
        return c0, np.column_stack([c1 - c0, c2 - c0])

    def project(self, table) -> tuple:
        """Least-squares section coordinates of a table (in correlator space) and the residual norm."""
        c0, A = self._frame
        target = np.array(coordinates(list(table)), dtype=float) - c0
        sol, *_ = np.linalg.lstsq(A, target, rcond=None)
        resid = float(np.linalg.norm(A @ sol - target))
        return float(sol[0]), float(sol[1]), resid


def distillation_section() -> Section2D:
    """The ``(eps, gamma)`` section: ``eps PR + gamma P_L^{0101} + (1-eps-gamma) mixed``."""
    return Section2D(make_maximally_mixed(), make_pr(), make_local_deterministic(0, 1, 0, 1), "eps-gamma")


def and_section() -> Section2D:
    """Isotropic line times the ``P_L^{0000}`` direction.

    A best guess at a section in which the AND map's lift off the isotropic
    line is visible; not an authoritative reconstruction.
    """
    return Section2D(make_maximally_mixed(), make_pr(), make_local_deterministic(0, 0, 0, 0), "iso-and")


@dataclass(frozen=True)
class MapStep:
    protocol: Wiring
    copies: Optional[int] = None

    def __post_init__(self):
        if self.copies is None:
            object.__setattr__(self, "copies", self.protocol.n)
        if self.copies != self.protocol.n:
            raise ValueError("copies must match the protocol's box count")

    def __call__(self, section: Section2D, point) -> tuple:
        """``(u', v', residual)`` after one application."""
        t = section.table(*point)
        out = wire_tables(self.protocol, [t] * self.copies)
        return section.project(out)


@dataclass
class Trajectory:
    points: list
    residuals: list = field(default_factory=list)
    exited: bool = False


def in_simplex(u, v, tol=1e-12) -> bool:
    return u >= -tol and v >= -tol and u + v <= 1 + tol


def iterate_map(step: MapStep, section: Section2D, p0, k: int) -> Trajectory:
    u, v = map(float, p0)
    if not in_simplex(u, v):
        raise ValueError(f"start point {p0} outside the section simplex")
    traj = Trajectory([(u, v)], [0.0])
    for _ in range(k):
        u, v, r = step(section, (u, v))
        if not in_simplex(u, v):
            traj.exited = True
            break
        traj.points.append((u, v))
        traj.residuals.append(r)
    return traj


def classify(derivative: float, tol: float = 1e-6) -> str:
    d = abs(derivative)
    if d < 1 - tol:
        return ATTRACTING
    if d > 1 + tol:
        return REPELLING
    return MARGINAL


@dataclass(frozen=True)
class FixedPoint:
    point: float
    derivative: float
    classification: str


def central_difference(f: Callable[[float], float], x: float, h: float = 1e-5) -> float:
    return (f(x + h) - f(x - h)) / (2 * h)


def fixed_points_1d(update: Callable[[float], float], samples: int = 1001, h: float = 1e-5,
                    tol: float = 1e-12) -> list[FixedPoint]:
    """Fixed points of ``update`` on [0, 1]: sampled zeros plus sign changes refined by Brent's method."""
    xs = np.linspace(0.0, 1.0, samples)
    g = np.array([update(x) - x for x in xs])
    roots = []
    for k, x in enumerate(xs):
        if abs(g[k]) <= tol:
            roots.append(float(x))
        elif k + 1 < samples and abs(g[k + 1]) > tol and g[k] * g[k + 1] < 0:
            roots.append(brentq(lambda t: update(t) - t, x, xs[k + 1], xtol=1e-15))
    roots = sorted(set(roots))
    out = []
    for r in roots:
        d = central_difference(update, r, h)
        out.append(FixedPoint(r, d, classify(d)))
    return out


def jacobian(step: MapStep, section: Section2D, point, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of the projected map at ``point``."""
    u, v = map(float, point)
    J = np.zeros((2, 2))
    for col, (du, dv) in enumerate(((h, 0.0), (0.0, h))):
        plus = step(section, (u + du, v + dv))
        minus = step(section, (u - du, v - dv))
        J[0, col] = (plus[0] - minus[0]) / (2 * h)
        J[1, col] = (plus[1] - minus[1]) / (2 * h)
    return J


def vector_field(step: MapStep, section: Section2D, grid: int, workers: int = 1) -> list[tuple]:
    """Rows ``(u, v, du, dv, residual)`` on the nodes ``(i/grid, j/grid)`` with ``i + j <= grid``."""
    nodes = [(i / grid, j / grid) for i in range(grid + 1) for j in range(grid + 1 - i)]
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            images = pool.starmap(step, [(section, n) for n in nodes])
    else:
        images = [step(section, n) for n in nodes]
    return [(u, v, u2 - u, v2 - v, r) for (u, v), (u2, v2, r) in zip(nodes, images)]


def write_field_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "du", "dv", "residual"])
        for row in rows:
            w.writerow([f"{x:.17g}" for x in row])


def protocol_by_name(name: str) -> Wiring:
    if name == "distill":
        return distillation_wiring()
    if name == "and":
        return and_wiring(2)
    raise ValueError(f"unknown protocol {name!r}")


def exact_section_step(eps, gamma) -> tuple:
    """One distillation step on the (eps, gamma) section, projected exactly (rational normal equations)."""
    from .box import make_section_box
    from .wiring import apply_wiring

    sec = distillation_section()
    out = apply_wiring(distillation_wiring(), [make_section_box(eps, gamma)] * 2)
    c0, c1, c2 = (coordinates(b.p) for b in (sec.b0, sec.b1, sec.b2))
    d1 = [a - b for a, b in zip(c1, c0)]
    d2 = [a - b for a, b in zip(c2, c0)]
    t = [a - b for a, b in zip(coordinates(out.p), c0)]
    dot = lambda p, q: sum(Fraction(x) * y for x, y in zip(p, q))  # noqa: E731
    a11, a12, a22 = dot(d1, d1), dot(d1, d2), dot(d2, d2)
    r1, r2 = dot(d1, t), dot(d2, t)
    det = a11 * a22 - a12 * a12
    return (a22 * r1 - a12 * r2) / det, (a11 * r2 - a12 * r1) / det
