"""Binary-input/binary-output non-signaling boxes with exact rational entries.

Table layout: entry ``p(ab|xy)`` lives at flat index ``8*x + 4*y + 2*a + b``
(row-major over ``(x, y, a, b)``). This is also the serialized order.

Marginals use the +/-1 convention: ``mA_x = <(-1)^a>`` given ``x``, likewise
``mB_y`` for Bob.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

BITS = (0, 1)


class InvalidMixtureError(ValueError):
    pass


class OutsidePolytopeError(ValueError):
    pass


def idx(x: int, y: int, a: int, b: int) -> int:
    return 8 * x + 4 * y + 2 * a + b


INDICES = tuple(product(BITS, BITS, BITS, BITS))  # (x, y, a, b) in flat order


def as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v.strip())
    return Fraction(v)


@dataclass(frozen=True)
class Box:
    p: tuple

    def __post_init__(self):
        if len(self.p) != 16:
            raise ValueError(f"a box table has 16 entries, got {len(self.p)}")
        object.__setattr__(self, "p", tuple(as_fraction(v) for v in self.p))

    def prob(self, a: int, b: int, x: int, y: int) -> Fraction:
        return self.p[idx(x, y, a, b)]

    def __iter__(self):
        return iter(self.p)

    def to_json(self) -> dict:
        return {"p": [f"{v.numerator}/{v.denominator}" for v in self.p]}

    @classmethod
    def from_json(cls, obj) -> "Box":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            entries = obj["p"]
        except (KeyError, TypeError):
            raise ValueError("box JSON must be an object with a 'p' list") from None
        for v in entries:
            if not isinstance(v, str):
                raise ValueError("box entries must be exact 'num/den' strings")
        return cls(entries)

    def to_csv_row(self) -> list[str]:
        return [f"{v.numerator}/{v.denominator}" for v in self.p]

    def __repr__(self):
        return "Box(" + ", ".join(str(v) for v in self.p) + ")"


def csv_header() -> list[str]:
    return [f"p{a}{b}|{x}{y}" for x, y, a, b in INDICES]


def _table(fn) -> Box:
    return Box([fn(a, b, x, y) for x, y, a, b in INDICES])


def make_local_deterministic(mu: int, nu: int, sigma: int, tau: int) -> Box:
    """Deterministic box with ``a = mu*x ^ nu`` and ``b = sigma*y ^ tau``."""
    return _table(lambda a, b, x, y: int(a == (mu * x) ^ nu and b == (sigma * y) ^ tau))


def make_extremal_nl(mu: int, nu: int, sigma: int) -> Box:
    """Extremal non-local box; ``(0, 0, 0)`` is the PR box."""
    half = Fraction(1, 2)
    return _table(lambda a, b, x, y: half if a ^ b == (x * y) ^ (mu * x) ^ (nu * y) ^ sigma else 0)


def make_pr() -> Box:
    return make_extremal_nl(0, 0, 0)


def make_maximally_mixed() -> Box:
    return Box([Fraction(1, 4)] * 16)


def mix(terms: Iterable[tuple]) -> Box:
    """Convex combination of ``(weight, Box)`` pairs, exact."""
    terms = [(as_fraction(w), b) for w, b in terms]
    if not terms:
        raise InvalidMixtureError("empty mixture")
    if any(w < 0 for w, _ in terms):
        raise InvalidMixtureError("negative mixture weight")
    if sum(w for w, _ in terms) != 1:
        raise InvalidMixtureError("mixture weights must sum to 1")
    out = [Fraction(0)] * 16
    for w, b in terms:
        if w:
            for i, v in enumerate(b.p):
                out[i] += w * v
    return Box(out)


def _check_unit(name, v):
    if not 0 <= v <= 1:
        raise InvalidMixtureError(f"{name}={v} outside [0, 1]")


def make_correlated_nl(eps) -> Box:
    eps = as_fraction(eps)
    _check_unit("eps", eps)
    return mix([(eps, make_pr()), (1 - eps, make_local_deterministic(0, 1, 0, 1))])


def make_isotropic(eps, mu: int = 0, nu: int = 0, sigma: int = 0) -> Box:
    eps = as_fraction(eps)
    _check_unit("eps", eps)
    return mix([(eps, make_extremal_nl(mu, nu, sigma)), (1 - eps, make_maximally_mixed())])


def make_section_box(eps, gamma) -> Box:
    """``eps*PR + gamma*P_L^{0101} + (1-eps-gamma)*mixed``."""
    eps, gamma = as_fraction(eps), as_fraction(gamma)
    if eps < 0 or gamma < 0 or eps + gamma > 1:
        raise InvalidMixtureError(f"(eps, gamma)=({eps}, {gamma}) outside the simplex")
    return mix([
        (eps, make_pr()),
        (gamma, make_local_deterministic(0, 1, 0, 1)),
        (1 - eps - gamma, make_maximally_mixed()),
    ])


def edge_delta(mu, nu, sigma, alpha, beta, gamma) -> int:
    return ((alpha ^ mu) & (gamma ^ nu)) ^ beta ^ sigma


def make_edge_box(mu, nu, sigma, alpha, beta, gamma, eps) -> Box:
    """``eps*P_NL^{mu nu sigma} + (1-eps)*P_L^{alpha beta gamma delta}`` on an edge of NS minus L."""
    eps = as_fraction(eps)
    _check_unit("eps", eps)
    delta = edge_delta(mu, nu, sigma, alpha, beta, gamma)
    return mix([
        (eps, make_extremal_nl(mu, nu, sigma)),
        (1 - eps, make_local_deterministic(alpha, beta, gamma, delta)),
    ])


def local_deterministic_boxes() -> list[Box]:
    return [make_local_deterministic(*bits) for bits in product(BITS, repeat=4)]


def extremal_nl_boxes() -> list[Box]:
    return [make_extremal_nl(*bits) for bits in product(BITS, repeat=3)]


def ns_vertices() -> list[Box]:
    """The 24 vertices of NS: 8 extremal non-local boxes then 16 deterministic ones."""
    return extremal_nl_boxes() + local_deterministic_boxes()


@dataclass(frozen=True)
class Correlators:
    E00: Fraction
    E01: Fraction
    E10: Fraction
    E11: Fraction
    mA0: Fraction
    mA1: Fraction
    mB0: Fraction
    mB1: Fraction

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, as_fraction(getattr(self, name)))

    def E(self, x: int, y: int) -> Fraction:
        return (self.E00, self.E01, self.E10, self.E11)[2 * x + y]

    def as_tuple(self) -> tuple:
        return (self.E00, self.E01, self.E10, self.E11, self.mA0, self.mA1, self.mB0, self.mB1)


def correlator_rows() -> list[list[int]]:
    """Integer rows mapping a 16-entry table to the 8 correlator coordinates.

    Alice's marginal is read at ``y = 0`` and Bob's at ``x = 0``; on
    non-signaling tables the choice is immaterial.
    """
    rows = []
    for x, y in product(BITS, BITS):
        row = [0] * 16
        for a, b in product(BITS, BITS):
            row[idx(x, y, a, b)] = (-1) ** (a ^ b)
        rows.append(row)
    for x in BITS:
        row = [0] * 16
        for a, b in product(BITS, BITS):
            row[idx(x, 0, a, b)] = (-1) ** a
        rows.append(row)
    for y in BITS:
        row = [0] * 16
        for a, b in product(BITS, BITS):
            row[idx(0, y, a, b)] = (-1) ** b
        rows.append(row)
    return rows


_CORR_ROWS = correlator_rows()


def coordinates(p: Sequence) -> list:
    """The 8 correlator coordinates of any numeric table (exact or float)."""
    return [sum(c * v for c, v in zip(row, p) if c) for row in _CORR_ROWS]


def correlators(b: Box) -> Correlators:
    return Correlators(*coordinates(b.p))


def box_from_correlators(c: Correlators) -> Box:
    ma, mb = (c.mA0, c.mA1), (c.mB0, c.mB1)
    out = []
    for x, y, a, b in INDICES:
        out.append((1 + (-1) ** a * ma[x] + (-1) ** b * mb[y] + (-1) ** (a ^ b) * c.E(x, y)) / 4)
    if any(v < 0 for v in out):
        raise OutsidePolytopeError(f"correlators {c.as_tuple()} give a negative probability")
    return Box(out)


# The 8 CHSH forms: sign patterns over (E00, E01, E10, E11) obtained from
# (+, +, +, -) by flipping an even number of signs. Order: no flips, the six
# pairs in lexicographic order, all four.
_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
CHSH_SIGNS = tuple(
    tuple(s * (-1 if k in flips else 1) for k, s in enumerate((1, 1, 1, -1)))
    for flips in [()] + _PAIRS + [(0, 1, 2, 3)]
)


def chsh_from_correlators(E00, E01, E10, E11, sym: int = 0):
    s = CHSH_SIGNS[sym]
    return s[0] * E00 + s[1] * E01 + s[2] * E10 + s[3] * E11


def chsh_value(b: Box, sym: int = 0) -> Fraction:
    c = correlators(b)
    return chsh_from_correlators(c.E00, c.E01, c.E10, c.E11, sym)


def chsh_values(b: Box) -> tuple:
    c = correlators(b)
    return tuple(chsh_from_correlators(c.E00, c.E01, c.E10, c.E11, s) for s in range(8))


def ch_value(b: Box) -> Fraction:
    """Clauser-Horne expression; equals ``(2 - CHSH)/4`` on non-signaling boxes."""
    return 1 - b.prob(1, 1, 0, 0) - b.prob(0, 0, 1, 0) - b.prob(0, 0, 0, 1) + b.prob(0, 0, 1, 1)


@dataclass(frozen=True)
class ValidationReport:
    normalization: bool
    non_negativity: bool
    non_signaling: bool
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return self.normalization and self.non_negativity and self.non_signaling

    def __bool__(self):
        return self.ok


def validate(b) -> ValidationReport:
    """Check normalization, non-negativity and non-signaling exactly."""
    p = b.p if isinstance(b, Box) else tuple(as_fraction(v) for v in b)
    failures = []
    norm = True
    for x, y in product(BITS, BITS):
        total = sum(p[idx(x, y, a, bb)] for a, bb in product(BITS, BITS))
        if total != 1:
            norm = False
            failures.append(f"normalization: sum over ab at xy={x}{y} is {total}")
    neg = [i for i, v in enumerate(p) if v < 0]
    for i in neg:
        failures.append(f"non-negativity: entry {i} is {p[i]}")
    ns = True
    for a, x in product(BITS, BITS):
        m = [p[idx(x, y, a, 0)] + p[idx(x, y, a, 1)] for y in BITS]
        if m[0] != m[1]:
            ns = False
            failures.append(f"non-signaling: Alice marginal p(a={a}|x={x}) depends on y")
    for bb, y in product(BITS, BITS):
        m = [p[idx(x, y, 0, bb)] + p[idx(x, y, 1, bb)] for x in BITS]
        if m[0] != m[1]:
            ns = False
            failures.append(f"non-signaling: Bob marginal p(b={bb}|y={y}) depends on x")
    return ValidationReport(norm, not neg, ns, tuple(failures))


def random_box(rng, support: int | None = None, max_weight: int = 9) -> Box:
    """Random valid box: integer-weighted mixture of a random subset of the 24 NS vertices.

    ``rng`` is a ``random.Random``; weights are exact rationals.
    """
    verts = ns_vertices()
    k = support or rng.randint(1, len(verts))
    chosen = rng.sample(verts, k)
    weights = [rng.randint(1, max_weight) for _ in chosen]
    total = sum(weights)
    return mix([(Fraction(w, total), b) for w, b in zip(weights, chosen)])
