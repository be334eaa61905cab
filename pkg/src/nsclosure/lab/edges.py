"""Distilling edge boxes of NS minus L out of the CHSH-cut polytope."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ..box import (
    Box,
    as_fraction,
    chsh_value,
    edge_delta,
    make_edge_box,
    make_extremal_nl,
    make_local_deterministic,
    make_pr,
)
from ..geometry import ParameterError
from ..symmetry import Relabeling, group
from ..wiring import Wiring, apply_wiring, conjugate_wiring, distillation_wiring

CANONICAL_EDGE = (0, 0, 0, 0, 1, 0)  # PR over P_L^{0101}


def edge_chsh_form(mu: int, nu: int, sigma: int) -> int:
    """Index of the CHSH form reaching 4 on ``P_NL^{mu nu sigma}``."""
    nl = make_extremal_nl(mu, nu, sigma)
    return next(s for s in range(8) if chsh_value(nl, s) == 4)


def edge_eps(edge: tuple, b: Box) -> Optional[Fraction]:
    """``eps`` if ``b`` lies on the given edge, else ``None``."""
    eps = chsh_value(b, edge_chsh_form(*edge[:3])) / 2 - 1
    if 0 <= eps <= 1 and make_edge_box(*edge, eps) == b:
        return eps
    return None


def find_edge_conjugation(edge: tuple, eps) -> Optional[tuple]:
    """First relabeling ``g`` whose conjugated distillation protocol moves the edge box up its edge.

    Returns ``(g, conjugated wiring, new eps)`` or ``None``.
    """
    eps = as_fraction(eps)
    box = make_edge_box(*edge, eps)
    base = distillation_wiring()
    for g in group():
        w = conjugate_wiring(g, g, base)
        new = edge_eps(edge, apply_wiring(w, [box, box]))
        if new is not None and new > eps:
            return g, w, new
    return None


def edge_symmetry(edge: tuple) -> Relabeling:
    """Relabeling carrying the canonical edge (PR, P_L^{0101}) onto ``edge``."""
    mu, nu, sigma, alpha, beta, gamma = edge
    nl = make_extremal_nl(mu, nu, sigma)
    loc = make_local_deterministic(alpha, beta, gamma, edge_delta(*edge))
    pr, l0 = make_pr(), make_local_deterministic(0, 1, 0, 1)
    for g in group():
        if g.apply(pr) == nl and g.apply(l0) == loc:
            return g
    raise LookupError(f"no relabeling maps the canonical edge onto {edge}")


@dataclass
class EdgeTrajectory:
    edge: tuple
    relabeling: Relabeling
    wiring: Wiring
    eps: list  # exact eps after 0..k steps
    S: Fraction
    exit_step: Optional[int]  # first step whose CHSH value exceeds S
    chsh: list = field(default_factory=list)

    def to_json(self) -> dict:
        from ..symmetry import relabeling_to_json

        return {"edge": list(self.edge), "relabeling": relabeling_to_json(self.relabeling),
                "wiring": self.wiring.to_json(), "eps": [str(e) for e in self.eps],
                "eps_float": [float(e) for e in self.eps], "S": str(self.S), "exit_step": self.exit_step}


def distill_edge_out(mu, nu, sigma, alpha, beta, gamma, eps, k: int, S=None) -> EdgeTrajectory:
    """Iterate the suitably conjugated distillation protocol ``k`` times on an edge box.

    ``S`` defaults to the CHSH cut ``2(1 + eps)`` of the polytope the box is a vertex of.
    """
    eps = as_fraction(eps)
    if not 0 < eps <= 1:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    edge = (mu, nu, sigma, alpha, beta, gamma)
    g = edge_symmetry(edge)
    w = conjugate_wiring(g, g, distillation_wiring())
    form = edge_chsh_form(mu, nu, sigma)
    S = 2 * (1 + eps) if S is None else as_fraction(S)
    box = make_edge_box(*edge, eps)
    epss, chshs, exit_step = [eps], [chsh_value(box, form)], None
    for step in range(1, k + 1):
        box = apply_wiring(w, [box, box])
        e = edge_eps(edge, box)
        if e is None:  # pragma: no cover - the conjugation keeps the edge invariant
            raise RuntimeError("conjugated protocol left the edge")
        epss.append(e)
        chshs.append(chsh_value(box, form))
        if exit_step is None and chshs[-1] > S:
            exit_step = step
    return EdgeTrajectory(edge, g, w, epss, S, exit_step, chshs)
