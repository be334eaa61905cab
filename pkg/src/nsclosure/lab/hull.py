"""Iterated hull growth under AND wirings of isotropic boxes."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

from ..box import Box, as_fraction, make_isotropic
from ..geometry import MembershipCertificate, ParameterError, VPolytope, in_hull, r_b_polytope, reduce
from ..symmetry import group
from ..wiring import and_closed_form

log = logging.getLogger(__name__)


@dataclass
class HullStage:
    n: int
    vertex_count: int
    generated: int  # distinct boxes in the orbit of the n-copy AND output
    outside: int  # how many of them lie outside the previous stage
    certificates: list = field(default_factory=list)  # (Box, MembershipCertificate) per new box

    def to_json(self) -> dict:
        return {"n": self.n, "vertex_count": self.vertex_count, "generated": self.generated,
                "outside": self.outside,
                "certificates": [{"box": b.to_json(), "certificate": c.to_json()} for b, c in self.certificates]}


@dataclass
class HullIterationReport:
    eps: Fraction
    stages: list

    @property
    def vertex_counts(self) -> list:
        return [s.vertex_count for s in self.stages]

    def to_json(self) -> dict:
        return {"eps": str(self.eps), "stages": [s.to_json() for s in self.stages]}


def _orbit_certificates(rep: Box, rep_cert: MembershipCertificate, poly: VPolytope):
    """Certificates for every image of ``rep``, transported by symmetry and re-verified."""
    out = {}
    for g in group():
        img = g.apply(rep)
        if img.p in out:
            continue
        if rep_cert.inside:
            cert = in_hull(img, poly)
        else:
            cert = MembershipCertificate(False, separator=rep_cert.separator.relabel(g))
            if not cert.verify(img, poly):
                cert = in_hull(img, poly)
        out[img.p] = (img, cert)
    return list(out.values())


def iterate_hull(eps, n_max: int) -> HullIterationReport:
    """Grow ``R_b`` stage by stage with the orbit of the n-copy AND box, n = 2..n_max."""
    eps = as_fraction(eps)
    if not Fraction(1, 2) < eps < 1:
        raise ParameterError(f"eps must lie in (1/2, 1), got {eps}")
    if n_max < 2:
        raise ParameterError("n_max must be >= 2")
    poly = r_b_polytope(4 * eps)
    stages = [HullStage(1, len(poly), 0, 0)]
    iso = make_isotropic(eps)
    elements = group()
    for n in range(2, n_max + 1):
        rep = and_closed_form(iso, n)
        rep_cert = in_hull(rep, poly)
        certs = _orbit_certificates(rep, rep_cert, poly)
        new = [(b, c) for b, c in certs if not c.inside]
        if new:
            labels = poly.labels + tuple(f"AND{n}" for _ in new)
            poly = reduce(VPolytope(poly.vertices + tuple(b for b, _ in new), labels), elements)
        log.info("stage n=%d: %d generated, %d outside, %d vertices", n, len(certs), len(new), len(poly))
        stages.append(HullStage(n, len(poly), len(certs), len(new), new))
    return HullIterationReport(eps, stages)
