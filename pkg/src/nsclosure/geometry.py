"""Exact polytope machinery on the 8-dimensional non-signaling polytope."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from . import lp
from .box import (
    BITS,
    CHSH_SIGNS,
    Box,
    as_fraction,
    coordinates,
    correlator_rows,
    correlators,
    edge_delta,
    idx,
    local_deterministic_boxes,
    make_edge_box,
    make_isotropic,
    ns_vertices,
    validate,
)
from .symmetry import Relabeling, group


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class LinearFunctional:
    """Affine functional ``constant + sum_k coefficients[k] * p[k]``, read as ``>= 0``."""

    coefficients: tuple
    constant: Fraction = Fraction(0)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.coefficients) != 16:
            raise ValueError("a functional needs 16 coefficients")
        object.__setattr__(self, "coefficients", tuple(as_fraction(c) for c in self.coefficients))
        object.__setattr__(self, "constant", as_fraction(self.constant))

    def __call__(self, b) -> Fraction:
        p = b.p if isinstance(b, Box) else b
        return self.constant + sum(c * v for c, v in zip(self.coefficients, p) if c)

    evaluate = __call__

    def relabel(self, g: Relabeling) -> "LinearFunctional":
        # (g F)(g P) = F(P)
        return LinearFunctional(tuple(self.coefficients[j] for j in g.perm), self.constant, self.name)

    def scaled(self, k) -> "LinearFunctional":
        k = as_fraction(k)
        return LinearFunctional(tuple(k * c for c in self.coefficients), k * self.constant, self.name)

    def normalized(self) -> "LinearFunctional":
        """Positive multiple with coprime integer coefficients."""
        vals = list(self.coefficients) + [self.constant]
        lcm = 1
        for v in vals:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        ints = [int(v * lcm) for v in vals]
        g = 0
        for v in ints:
            g = math.gcd(g, v)
        g = g or 1
        return LinearFunctional(tuple(Fraction(v, g) for v in ints[:16]), Fraction(ints[16], g), self.name)

    def ns_key(self) -> tuple:
        """Values on the 24 NS vertices; identifies the functional on the NS affine hull."""
        return tuple(self(v) for v in _ns_vertices())

    def to_json(self) -> dict:
        return {"name": self.name,
                "coefficients": [f"{c.numerator}/{c.denominator}" for c in self.coefficients],
                "constant": f"{self.constant.numerator}/{self.constant.denominator}"}

    @classmethod
    def from_json(cls, obj) -> "LinearFunctional":
        return cls(tuple(Fraction(c) for c in obj["coefficients"]), Fraction(obj["constant"]), obj.get("name", ""))


_NS = None


def _ns_vertices():
    global _NS
    if _NS is None:
        _NS = ns_vertices()
    return _NS


def positivity(a: int, b: int, x: int, y: int) -> LinearFunctional:
    c = [0] * 16
    c[idx(x, y, a, b)] = 1
    return LinearFunctional(tuple(c), 0, f"p({a}{b}|{x}{y})>=0")


def positivity_facets() -> list[LinearFunctional]:
    return [positivity(a, b, x, y) for x, y, a, b in product(BITS, repeat=4)]


def chsh_functional(sym: int = 0, bound=2) -> LinearFunctional:
    """``bound - CHSH_sym >= 0`` written over table entries."""
    rows = correlator_rows()
    c = [Fraction(0)] * 16
    for k, s in enumerate(CHSH_SIGNS[sym]):
        for j in range(16):
            c[j] -= s * rows[k][j]
    return LinearFunctional(tuple(c), as_fraction(bound), f"CHSH[{sym}]<={bound}")


def ch_functional() -> LinearFunctional:
    c = [0] * 16
    c[idx(0, 0, 1, 1)] = -1
    c[idx(1, 0, 0, 0)] = -1
    c[idx(0, 1, 0, 0)] = -1
    c[idx(1, 1, 0, 0)] = 1
    return LinearFunctional(tuple(c), 1, "CH>=0")


def tilted_ch(q) -> LinearFunctional:
    """``I(q) = CH + q P(11|11) >= 0``."""
    q = as_fraction(q)
    if q < 0:
        raise ParameterError("q must be non-negative")
    ch = ch_functional()
    c = list(ch.coefficients)
    c[idx(1, 1, 1, 1)] += q
    return LinearFunctional(tuple(c), ch.constant, f"I(q={q})>=0")


def facet_q(eps) -> Fraction:
    """Tilt ``q = 2(2 eps - 1)/(1 - eps)`` of the new facet of the noisy-PR polytope."""
    eps = as_fraction(eps)
    if eps == 1:
        raise ZeroDivisionError("facet_q is undefined at eps = 1")
    if not Fraction(1, 2) <= eps < 1:
        raise ParameterError(f"facet_q needs 1/2 <= eps < 1, got {eps}")
    return 2 * (2 * eps - 1) / (1 - eps)


def facet_orbit(f: LinearFunctional, elements=None) -> list[LinearFunctional]:
    """Distinct images of ``f`` under the relabeling group (compared on NS)."""
    seen = {}
    for g in elements or group():
        img = f.relabel(g)
        seen.setdefault(img.ns_key(), img)
    return list(seen.values())


def uffink_lhs_from_correlators(E00, E01, E10, E11):
    return (E00 + E10) ** 2 + (E01 - E11) ** 2


def uffink_lhs(b: Box) -> Fraction:
    c = correlators(b)
    return uffink_lhs_from_correlators(c.E00, c.E01, c.E10, c.E11)


def in_uffink(b: Box) -> bool:
    return bool(validate(b)) and uffink_lhs(b) <= 4


@dataclass(frozen=True)
class VPolytope:
    vertices: tuple
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        labels = tuple(self.labels) or tuple(None for _ in self.vertices)
        if len(labels) != len(self.vertices):
            raise ValueError("one label per vertex")
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.vertices)

    def is_invariant(self, elements=None) -> bool:
        keys = {v.p for v in self.vertices}
        return all(g.apply(v).p in keys for g in elements or group() for v in self.vertices)

    def to_json(self) -> list:
        return [dict(v.to_json(), label=lab) for v, lab in zip(self.vertices, self.labels)]

    @classmethod
    def from_json(cls, obj) -> "VPolytope":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(Box.from_json(o) for o in obj), tuple(o.get("label") for o in obj))


@dataclass(frozen=True)
class MembershipCertificate:
    inside: bool
    weights: Optional[tuple] = None
    separator: Optional[LinearFunctional] = None

    def verify(self, b: Box, poly: VPolytope) -> bool:
        if self.inside:
            w = self.weights
            if w is None or len(w) != len(poly.vertices) or any(x < 0 for x in w) or sum(w) != 1:
                return False
            combo = [sum(wi * v.p[k] for wi, v in zip(w, poly.vertices) if wi) for k in range(16)]
            return tuple(combo) == b.p
        h = self.separator
        return h is not None and h(b) < 0 and all(h(v) >= 0 for v in poly.vertices)

    def to_json(self) -> dict:
        if self.inside:
            return {"inside": True, "weights": [f"{w.numerator}/{w.denominator}" for w in self.weights]}
        return {"inside": False, "separator": self.separator.to_json()}

    @classmethod
    def from_json(cls, obj) -> "MembershipCertificate":
        if obj.get("inside"):
            return cls(True, weights=tuple(Fraction(w) for w in obj["weights"]))
        return cls(False, separator=LinearFunctional.from_json(obj["separator"]))


_ROWS = correlator_rows()


def _column(p) -> list:
    return coordinates(p) + [1]


def in_hull(b: Box, poly: VPolytope) -> MembershipCertificate:
    """Decide ``b in conv(poly)`` exactly; the certificate is verified before returning."""
    if not validate(b):
        raise ValueError("in_hull expects a valid non-signaling box")
    cols = [_column(v.p) for v in poly.vertices]
    A = [[col[i] for col in cols] for i in range(9)]
    res = lp.feasible_point(A, _column(b.p))
    if res.status == "optimal":
        cert = MembershipCertificate(True, weights=tuple(res.x))
    else:
        h = res.farkas
        coeffs = [sum(h[i] * _ROWS[i][k] for i in range(8)) for k in range(16)]
        sep = LinearFunctional(tuple(coeffs), h[8], "separator").normalized()
        cert = MembershipCertificate(False, separator=sep)
    if not cert.verify(b, poly):  # pragma: no cover - would indicate a solver bug
        raise RuntimeError("membership certificate failed exact verification")
    return cert


def reduce(poly: VPolytope, elements=None) -> VPolytope:
    """Drop duplicates and every point that is a convex combination of the others.

    With ``elements`` (a symmetry group under which ``poly`` is invariant) only
    one point per orbit is tested; redundancy is orbit-invariant.
    """
    uniq, labels, seen = [], [], set()
    for v, lab in zip(poly.vertices, poly.labels):
        if v.p not in seen:
            seen.add(v.p)
            uniq.append(v)
            labels.append(lab)
    if len(uniq) <= 1:
        return VPolytope(tuple(uniq), tuple(labels))
    keep = {}
    for i, v in enumerate(uniq):
        if v.p in keep:
            continue
        others = VPolytope(tuple(u for j, u in enumerate(uniq) if j != i))
        extreme = not in_hull(v, others).inside
        if elements is None:
            keep[v.p] = extreme
        else:
            for g in elements:
                keep.setdefault(g.apply(v).p, extreme)
    kept = [(v, lab) for v, lab in zip(uniq, labels) if keep[v.p]]
    return VPolytope(tuple(v for v, _ in kept), tuple(lab for _, lab in kept))


def _check_S(S) -> Fraction:
    S = as_fraction(S)
    if not 2 < S < 4:
        raise ParameterError(f"S must lie in (2, 4), got {S}")
    return S


def local_polytope() -> VPolytope:
    boxes = local_deterministic_boxes()
    labels = [f"L{m}{n}{s}{t}" for m, n, s, t in product(BITS, repeat=4)]
    return VPolytope(tuple(boxes), tuple(labels))


def ns_polytope() -> VPolytope:
    labels = [f"NL{m}{n}{s}" for m, n, s in product(BITS, repeat=3)]
    labels += [f"L{m}{n}{s}{t}" for m, n, s, t in product(BITS, repeat=4)]
    return VPolytope(tuple(ns_vertices()), tuple(labels))


def edge_vertices(eps) -> list[tuple]:
    """The 64 edge boxes at ``eps`` with their ``(mu, nu, sigma, alpha, beta, gamma)`` labels."""
    out = []
    for mu, nu, sigma, alpha, beta, gamma in product(BITS, repeat=6):
        out.append(((mu, nu, sigma, alpha, beta, gamma), make_edge_box(mu, nu, sigma, alpha, beta, gamma, eps)))
    return out


def r_a_polytope(S) -> VPolytope:
    """CHSH cut at ``S``: 16 deterministic boxes plus 64 edge boxes at ``eps = S/2 - 1``."""
    S = _check_S(S)
    eps = S / 2 - 1
    loc = local_polytope()
    edges = edge_vertices(eps)
    labels = list(loc.labels) + [
        "E{}{}{},{}{}{}{}".format(*k[:3], *k[3:], edge_delta(*k)) for k, _ in edges
    ]
    return VPolytope(loc.vertices + tuple(b for _, b in edges), tuple(labels))


def r_b_polytope(S) -> VPolytope:
    """Noisy-PR polytope: 8 isotropic boxes at ``eps = S/4`` followed by the 16 deterministic ones.

    ``S = 4`` is accepted and gives back the NS vertices.
    """
    S = as_fraction(S)
    if not 2 < S <= 4:
        raise ParameterError(f"S must lie in (2, 4], got {S}")
    eps = S / 4
    iso = [make_isotropic(eps, m, n, s) for m, n, s in product(BITS, repeat=3)]
    loc = local_polytope()
    labels = [f"ISO{m}{n}{s}" for m, n, s in product(BITS, repeat=3)] + list(loc.labels)
    return VPolytope(tuple(iso) + loc.vertices, tuple(labels))


def exact_rank(rows: Sequence[Sequence]) -> int:
    m = [[as_fraction(v) for v in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, len(m)):
            f = m[i][col] / m[rank][col]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def affine_dimension(boxes: Sequence[Box]) -> int:
    if not boxes:
        return -1
    base = coordinates(boxes[0].p)
    return exact_rank([[c - b0 for c, b0 in zip(coordinates(v.p), base)] for v in boxes[1:]] or [[0]])


def supporting_set(f: LinearFunctional, poly: VPolytope) -> list[Box]:
    return [v for v in poly.vertices if f(v) == 0]


def is_valid_inequality(f: LinearFunctional, poly: VPolytope) -> bool:
    return all(f(v) >= 0 for v in poly.vertices)


def is_facet(f: LinearFunctional, poly: VPolytope) -> bool:
    """Valid on ``poly`` and tight on a 7-dimensional vertex set."""
    return is_valid_inequality(f, poly) and affine_dimension(supporting_set(f, poly)) == 7
