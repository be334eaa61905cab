"""The eleven acceptance criteria, each reported as one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary block at the
end of the session repeats every line.
"""
import random
from fractions import Fraction as F
from itertools import product

import pytest

from nsclosure.box import (
    chsh_value,
    correlators,
    local_deterministic_boxes,
    make_correlated_nl,
    make_edge_box,
    make_extremal_nl,
    make_isotropic,
    make_local_deterministic,
    make_maximally_mixed,
    make_pr,
    make_section_box,
    mix,
    random_box,
    validate,
)
from nsclosure.dynamics import ATTRACTING, REPELLING, central_difference, fixed_points_1d
from nsclosure.geometry import (
    VPolytope,
    affine_dimension,
    facet_orbit,
    facet_q,
    in_hull,
    local_polytope,
    ns_polytope,
    positivity_facets,
    r_a_polytope,
    r_b_polytope,
    supporting_set,
    tilted_ch,
)
from nsclosure.lab.edges import distill_edge_out, edge_chsh_form
from nsclosure.lab.escape import and_escape_box, and_escape_lhs, escape_threshold
from nsclosure.lab.hull import iterate_hull
from nsclosure.lab.search import input_maps, strategy_from, two_box_closure_search
from nsclosure.lab.uffink import distilled_correlators, one_step_prediction, uffink_escape_scan
from nsclosure.symmetry import group, orbit
from nsclosure.wiring import and_closed_form, and_wiring, apply_wiring, distillation_wiring, random_wiring

RESULTS = {}


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail=""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        RESULTS[number] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return _report


def test_01_distillation_map(report):
    w = distillation_wiring()
    grid = [F(k, 49) for k in range(50)]
    bad = [e for e in grid if apply_wiring(w, [make_correlated_nl(e)] * 2) != make_correlated_nl(2 * e - e * e)]
    report(1, "distillation maps correlated eps to 2eps - eps^2 exactly", not bad,
           f"{len(grid) - len(bad)}/{len(grid)} grid points")


def test_02_and_closed_form(report):
    rng = random.Random(2)
    checked = mismatches = 0
    for n in (2, 3):
        w = and_wiring(n)
        for _ in range(500):
            b = random_box(rng)
            checked += 1
            mismatches += apply_wiring(w, [b] * n) != and_closed_form(b, n)
    report(2, "AND closed form equals the wiring engine (n=2,3)", mismatches == 0,
           f"{checked - mismatches}/{checked} boxes")


def test_03_b_f_decomposition(report):
    w = distillation_wiring()
    parts = (make_pr(), make_extremal_nl(0, 1, 1), make_local_deterministic(0, 1, 0, 1), make_maximally_mixed())
    grid = [(F(i, 19), F(j, 19)) for i in range(20) for j in range(20)]
    sums_ok = all(
        e / 4 * (3 * e + 7 * g + 1) + e / 4 * (1 - e - g) + g * g + (1 - e - g) * (1 + e / 2 + g) == 1
        for e, g in grid)
    checked = bad = 0
    for e, g in grid:
        if e + g > 1:
            continue
        coeffs = (e / 4 * (3 * e + 7 * g + 1), e / 4 * (1 - e - g), g * g, (1 - e - g) * (1 + e / 2 + g))
        out = apply_wiring(w, [make_section_box(e, g)] * 2)
        c = correlators(out)
        checked += 1
        bad += out != mix(list(zip(coeffs, parts))) or (c.E00, c.E01, c.E10, c.E11) != distilled_correlators(e, g)
    report(3, "B_f decomposition and final correlators match the engine", sums_ok and bad == 0,
           f"{checked - bad}/{checked} section nodes, coefficients sum to 1 on all 400")


def test_04_facet_family(report):
    details, ok = [], True
    for eps in (F(3, 5), F(7, 10), F(4, 5), F(9, 10)):
        poly = r_b_polytope(4 * eps)
        f = tilted_ch(facet_q(eps))
        valid = all(f(v) >= 0 for v in poly.vertices)
        tight = supporting_set(f, poly)
        dim = affine_dimension(tight)
        ok &= valid and len(tight) == 8 and dim == 7 and len(poly) == 24
        details.append(f"eps={eps}: {len(tight)} tight, dim {dim}")
    report(4, "I(facet_q(eps)) is a facet of R_b(4 eps)", ok, ", ".join(details))


def test_05_escape_threshold(report):
    above = [F(k, 60) for k in range(41, 60)] + [F(2, 3) + F(1, 1000)]
    below = [F(k, 60) for k in range(31, 41)]
    esc_above = all(and_escape_box(2, e).violated for e in above)
    esc_below = not any(and_escape_box(2, e).violated for e in below)
    root = escape_threshold(2) == F(2, 3) and and_escape_lhs(2, F(2, 3)) == 0
    oracle = all(and_escape_lhs(2, e, "1+q") == and_escape_box(2, e).value for e in above + below)
    misprint = and_escape_lhs(2, F(2, 3), "q") != 0
    report(5, "AND escape iff eps > 2/3, exact root 2/3, coefficient is (1+q)",
           esc_above and esc_below and root and oracle and misprint,
           f"{len(above)} above, {len(below)} at/below; q form gives {and_escape_lhs(2, F(2, 3), 'q')} at 2/3")


def test_06_hull_iteration(report):
    eps = F(19, 20)
    rep = iterate_hull(eps, 10)
    seen = list(r_b_polytope(4 * eps).vertices)
    ok = True
    for stage in rep.stages[1:]:
        prev = VPolytope(tuple(seen))
        verified = all(not c.inside and c.verify(b, prev) for b, c in stage.certificates)
        if stage.n >= 3:
            ok &= stage.outside > 0 and verified
        seen.extend(b for b, _ in stage.certificates)
    counts = rep.vertex_counts
    ok &= all(a < b for a, b in zip(counts[1:], counts[2:]))
    report(6, "hull grows at every stage n=3..10 for eps=19/20 with LP certificates", ok,
           f"vertex counts {counts}")


def _strategy_in_space(s):
    maps = {m.inputs: m for m in input_maps()}
    key = tuple(tuple(s.run(x, (al & 1, al >> 1))[0] for al in range(4)) for x in (0, 1))
    out = s.output_table
    t0, t1 = (sum(((out >> (2 * al + x)) & 1) << al for al in range(4)) for x in (0, 1))
    return key in maps and strategy_from(maps[key], t0, t1).behaviour == s.behaviour


def test_07_exhaustive_two_box_search(report):
    results = {}
    for S in (F(5, 2), F(16, 5)):
        poly = r_b_polytope(S)
        facets = facet_orbit(tilted_ch(facet_q(S / 4))) + positivity_facets()
        results[S] = two_box_closure_search(poly, facets)
    closed, open_ = results[F(5, 2)], results[F(16, 5)]
    and_hits = [t for t in open_.tracked if t["wiring"] == "AND" and t["violated"]]
    ok = (closed.status == "closed" and closed.violation_count == 0
          and open_.status == "violations" and open_.verify() and bool(and_hits)
          and _strategy_in_space(and_wiring(2).alice) and _strategy_in_space(and_wiring(2).bob))
    c = closed.counters
    report(7, "two-box wirings: R_b(5/2) closed, R_b(16/5) violated incl. AND", ok,
           f"S=5/2 {c['cells_scanned']}/{c['cells_total']} cells, {c['wirings_evaluated']} wirings, "
           f"0 violations; S=16/5 {open_.violation_count} violating wirings, AND I(q) = {and_hits[0]['value']}"
           if and_hits else "AND not violated")


def test_08_edge_distillation(report):
    eps0 = F(3, 10)
    ok, exits = True, 0
    S_near = 4 - F(1, 10 ** 6)
    for edge in product((0, 1), repeat=6):
        traj = distill_edge_out(*edge, eps0, 10)
        ok &= all(a < b for a, b in zip(traj.eps, traj.eps[1:]))
        ok &= 1 - traj.eps[-1] == (1 - eps0) ** 1024
        ok &= traj.chsh[-1] > S_near
        exits += traj.exit_step == 1
    edge = (0, 1, 1, 1, 0, 1)
    traj = distill_edge_out(*edge, eps0, 1)
    box = make_edge_box(*edge, traj.eps[1])
    poly = r_a_polytope(2 * (1 + eps0))
    cert = in_hull(box, poly)
    ok &= not cert.inside and cert.verify(box, poly) and chsh_value(box, edge_chsh_form(*edge[:3])) > 2 * (1 + eps0)
    report(8, "all 64 edge boxes distill out of R_a; 1-eps_10 = (1-eps_0)^1024 exactly", ok,
           f"{exits}/64 leave R_a(13/5) after one step")


def test_09_uffink_escape(report):
    m = uffink_escape_scan(200, 3)
    inside = [p for p in m.points if p.inside]
    boundary_ok = all((p.first_escape == 1) == one_step_prediction(p.eps, p.gamma) for p in inside)
    counts = [m.count(k) for k in (1, 2, 3)]
    nested = m.region(1) < m.region(2) < m.region(3)
    local_ok = all(p.first_escape is None for p in m.points if p.eps == 0)
    report(9, "Uffink set not closed: one-step region matches the quartic, three nested regions",
           boundary_ok and nested and all(counts) and local_ok,
           f"200x200 grid, first-escape counts {counts}, {len(inside)} nodes inside")


def test_10_fixed_points(report):
    fps = fixed_points_1d(lambda e: 2 * e - e * e)
    ok = (len(fps) == 2
          and abs(fps[0].point) < 1e-12 and fps[0].classification == REPELLING and abs(fps[0].derivative - 2) < 1e-6
          and abs(fps[1].point - 1) < 1e-12 and fps[1].classification == ATTRACTING and abs(fps[1].derivative) < 1e-6)
    ok &= all(abs(central_difference(lambda e: 2 * e - e * e, x, 1e-5) - (2 - 2 * x)) < 1e-6
              for x in [k / 50 for k in range(51)])
    report(10, "fixed points of 2eps - eps^2: 0 repelling, 1 attracting", ok,
           ", ".join(f"{fp.point:.3g}: d={fp.derivative:.6f}" for fp in fps))


def test_11_property_suites(report):
    rng = random.Random(11)
    ns_ok = all(validate(apply_wiring(w, [random_box(rng) for _ in range(w.n)])).ok
                for w in (random_wiring(rng, rng.randint(1, 3)) for _ in range(200)))
    ml_ok = True
    for _ in range(50):
        w = random_wiring(rng, 2)
        b1, b2, rest = random_box(rng), random_box(rng), random_box(rng)
        lam = F(rng.randint(0, 9), 9)
        ml_ok &= apply_wiring(w, [mix([(lam, b1), (1 - lam, b2)]), rest]) == \
            mix([(lam, apply_wiring(w, [b1, rest])), (1 - lam, apply_wiring(w, [b2, rest]))])
    g = group()
    group_ok = len(g) == 128 and len({e.perm for e in g}) == 128
    for _ in range(200):
        a, b, c = rng.choice(g), rng.choice(g), rng.choice(g)
        group_ok &= (a @ (b @ c)).perm == ((a @ b) @ c).perm and (a @ a.inverse()).perm == tuple(range(16))
    sizes = (len(orbit(make_pr())), len(orbit(make_local_deterministic(0, 0, 0, 0))),
             len(orbit(and_closed_form(make_isotropic(F(4, 5)), 2))), len(facet_orbit(tilted_ch(6))))
    group_ok &= sizes == (8, 16, 64, 64)
    cert_ok = True
    polys = (local_polytope(), ns_polytope(), r_b_polytope(F(16, 5)), r_a_polytope(F(13, 5)))
    for _ in range(30):
        b = random_box(rng)
        for poly in polys:
            cert_ok &= in_hull(b, poly).verify(b, poly)
    L, locs = local_polytope(), local_deterministic_boxes()
    closure_ok = all(in_hull(apply_wiring(w, [rng.choice(locs) for _ in range(w.n)]), L).inside
                     for w in (random_wiring(rng, rng.randint(1, 2)) for _ in range(200)))
    report(11, "NS preservation, multilinearity, group axioms, certificates, L closure",
           ns_ok and ml_ok and group_ok and cert_ok and closure_ok,
           f"orbit sizes {sizes}")
