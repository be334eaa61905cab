"""Fast invariant suites, runnable without pytest (``nsclosure selftest``)."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .box import (
    box_from_correlators,
    correlators,
    make_correlated_nl,
    make_local_deterministic,
    make_maximally_mixed,
    make_pr,
    make_section_box,
    mix,
    random_box,
    validate,
)
from .geometry import (
    facet_q,
    in_hull,
    is_facet,
    local_polytope,
    ns_polytope,
    r_b_polytope,
    tilted_ch,
)
from .lab.escape import and_escape_condition, escape_threshold
from .symmetry import group, orbit
from .wiring import and_closed_form, and_wiring, apply_wiring, distillation_wiring, random_wiring


def _group_axioms(rng) -> bool:
    g = group()
    if len(g) != 128 or len({e.perm for e in g}) != 128:
        return False
    for _ in range(50):
        a, b, c = rng.choice(g), rng.choice(g), rng.choice(g)
        box = random_box(rng)
        if (a @ (b @ c)).perm != ((a @ b) @ c).perm:
            return False
        if (a @ b).apply(box) != a.apply(b.apply(box)) or a.inverse().apply(a.apply(box)) != box:
            return False
    return len(orbit(make_pr())) == 8 and len(orbit(make_local_deterministic(0, 0, 0, 0))) == 16


def _correlator_roundtrip(rng) -> bool:
    return all(box_from_correlators(correlators(b)) == b for b in (random_box(rng) for _ in range(100)))


def _distillation(rng) -> bool:
    w = distillation_wiring()
    for k in range(11):
        eps = Fraction(k, 10)
        if apply_wiring(w, [make_correlated_nl(eps)] * 2) != make_correlated_nl(2 * eps - eps * eps):
            return False
    return True


def _and_closed_form(rng) -> bool:
    for n in (2, 3):
        w = and_wiring(n)
        for _ in range(20):
            b = random_box(rng)
            if apply_wiring(w, [b] * n) != and_closed_form(b, n):
                return False
    return True


def _no_signaling(rng) -> bool:
    for _ in range(50):
        n = rng.randint(1, 3)
        if not validate(apply_wiring(random_wiring(rng, n), [random_box(rng) for _ in range(n)])).ok:
            return False
    return True


def _multilinear(rng) -> bool:
    for _ in range(20):
        w = random_wiring(rng, 2)
        b1, b2, rest = random_box(rng), random_box(rng), random_box(rng)
        lam = Fraction(rng.randint(0, 7), 7)
        lhs = apply_wiring(w, [mix([(lam, b1), (1 - lam, b2)]), rest])
        rhs = mix([(lam, apply_wiring(w, [b1, rest])), (1 - lam, apply_wiring(w, [b2, rest]))])
        if lhs != rhs:
            return False
    return True


def _certificates(rng) -> bool:
    L, NS = local_polytope(), ns_polytope()
    boxes = [make_maximally_mixed(), make_pr(), make_section_box(Fraction(1, 3), Fraction(1, 3))]
    boxes += [random_box(rng) for _ in range(5)]
    for b in boxes:
        for poly in (L, NS):
            if not in_hull(b, poly).verify(b, poly):
                return False
    return not in_hull(make_pr(), L).inside


def _facet(rng) -> bool:
    for eps in (Fraction(3, 5), Fraction(4, 5)):
        if not is_facet(tilted_ch(facet_q(eps)), r_b_polytope(4 * eps)):
            return False
    return True


def _escape(rng) -> bool:
    return (escape_threshold(2) == Fraction(2, 3)
            and and_escape_condition(2, Fraction(2, 3))[0] == 0
            and and_escape_condition(2, Fraction(4, 5)) == (Fraction(-9, 100), True))


CHECKS: dict[str, Callable] = {
    "relabeling group axioms": _group_axioms,
    "correlator round trip": _correlator_roundtrip,
    "distillation map on correlated boxes": _distillation,
    "AND closed form vs engine": _and_closed_form,
    "non-signaling preserved by random wirings": _no_signaling,
    "multilinearity of wirings": _multilinear,
    "membership certificates verify": _certificates,
    "tilted CH facet": _facet,
    "AND escape threshold": _escape,
}


def run_selftest(seed: int = 0) -> list[tuple[str, bool]]:
    rng = random.Random(seed)
    return [(name, bool(check(rng))) for name, check in CHECKS.items()]
