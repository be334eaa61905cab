import json
import random
from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import boxes, rationals01, seeds, wirings
from nsclosure.box import (
    Box,
    local_deterministic_boxes,
    make_correlated_nl,
    make_isotropic,
    make_pr,
    make_section_box,
    mix,
    random_box,
    validate,
)
from nsclosure.geometry import in_hull, local_polytope
from nsclosure.symmetry import IDENTITY, group
from nsclosure.wiring import (
    ArityError,
    PartyStrategy,
    Wiring,
    and_closed_form,
    and_wiring,
    apply_wiring,
    conjugate_wiring,
    distillation_wiring,
    identity_wiring,
    random_wiring,
    truth_table,
    wire_tables,
)


def bit(table, key):
    return (table >> key) & 1


def party_oracle(s: PartyStrategy, x, outs):
    """Run one party's circuit by hand; ``outs`` is indexed by box."""
    inputs, key = {}, x
    for j, box in enumerate(s.order):
        inputs[box] = bit(s.input_tables[j], key)
        key += outs[box] << (j + 1)
    out_key = x + sum(o << (i + 1) for i, o in enumerate(outs))
    return inputs, bit(s.output_table, out_key)


def wiring_oracle(w: Wiring, bxs):
    """Trajectory sum straight from the definition, with no compiled tables."""
    out = {}
    for x, y, a, b in product((0, 1), repeat=4):
        out[(x, y, a, b)] = F(0)
    for x, y in product((0, 1), repeat=2):
        for al in product((0, 1), repeat=w.n):
            xin, a = party_oracle(w.alice, x, al)
            for be in product((0, 1), repeat=w.n):
                yin, b = party_oracle(w.bob, y, be)
                prob = F(1)
                for j in range(w.n):
                    prob *= bxs[j].prob(al[j], be[j], xin[j], yin[j])
                out[(x, y, a, b)] += prob
    return Box([out[k] for k in product((0, 1), repeat=4)])


def distill_oracle(b1, b2):
    """The two-box protocol written as explicit boolean circuits."""
    res = {k: F(0) for k in product((0, 1), repeat=4)}
    for x, y, a1, b1_, a2, b2_ in product((0, 1), repeat=6):
        x2, y2 = x ^ a1 ^ 1, y & b1_
        p = b1.prob(a1, b1_, x, y) * b2.prob(a2, b2_, x2, y2)
        res[(x, y, a1 ^ a2 ^ 1, b1_ ^ b2_ ^ 1)] += p
    return Box([res[k] for k in product((0, 1), repeat=4)])


def test_truth_table_packing():
    # party input is the lowest bit
    assert truth_table(lambda x: x, 1) == 0b10
    assert truth_table(lambda x, a: a, 2) == 0b1100
    assert truth_table(lambda x, a: x ^ a, 2) == 0b0110


def test_strategy_validation():
    with pytest.raises(ValueError):
        PartyStrategy((0, 0), (0, 0), 0)
    with pytest.raises(ArityError):
        PartyStrategy((0, 1), (0,), 0)
    with pytest.raises(ValueError):
        PartyStrategy((0,), (1 << 2,), 0)
    with pytest.raises(ArityError):
        and_wiring(0)
    with pytest.raises(ArityError):
        apply_wiring(distillation_wiring(), [make_pr()])


def test_identity_wiring():
    for b in (make_pr(), make_isotropic(F(3, 4)), make_section_box(F(1, 5), F(1, 2))):
        assert apply_wiring(identity_wiring(), [b]) == b
    assert apply_wiring(and_wiring(1), [make_isotropic(F(2, 3))]) == make_isotropic(F(2, 3))


def test_distillation_examples():
    w = distillation_wiring()
    assert apply_wiring(w, [make_pr(), make_pr()]) == make_pr()
    assert apply_wiring(w, [make_correlated_nl(F(1, 2))] * 2) == make_correlated_nl(F(3, 4))


@given(boxes, boxes)
def test_distillation_vs_circuit_oracle(b1, b2):
    assert apply_wiring(distillation_wiring(), [b1, b2]) == distill_oracle(b1, b2)


@settings(max_examples=40)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(wirings(n), st.lists(boxes, min_size=n, max_size=n))))
def test_engine_vs_trajectory_oracle(case):
    w, bxs = case
    assert apply_wiring(w, bxs) == wiring_oracle(w, bxs)


@given(rationals01)
def test_distillation_map_on_correlated_line(eps):
    out = apply_wiring(distillation_wiring(), [make_correlated_nl(eps)] * 2)
    assert out == make_correlated_nl(2 * eps - eps * eps)


@settings(max_examples=30)
@given(boxes, st.integers(2, 3))
def test_and_closed_form_matches_engine(b, n):
    assert and_closed_form(b, n) == apply_wiring(and_wiring(n), [b] * n)


def test_and_closed_form_n1():
    b = make_section_box(F(2, 7), F(1, 7))
    assert and_closed_form(b, 1) == b


def test_and_of_deterministic_is_deterministic():
    locs = local_deterministic_boxes()
    keys = {b.p for b in locs}
    for b1, b2 in product(locs, locs):
        assert apply_wiring(and_wiring(2), [b1, b2]).p in keys


@settings(max_examples=200)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(wirings(n), st.lists(boxes, min_size=n, max_size=n))))
def test_non_signaling_preserved(case):
    w, bxs = case
    assert validate(apply_wiring(w, bxs)).ok


@settings(max_examples=40)
@given(wirings(2), boxes, boxes, boxes, rationals01, st.booleans())
def test_multilinearity(w, b1, b2, rest, lam, slot):
    def run(first):
        return apply_wiring(w, [first, rest] if slot else [rest, first])

    lhs = run(mix([(lam, b1), (1 - lam, b2)]))
    rhs = mix([(lam, run(b1)), (1 - lam, run(b2))])
    assert lhs == rhs


@given(seeds, boxes, boxes)
def test_order_independence_without_adaptivity(seed, b1, b2):
    rng = random.Random(seed)

    def nonadaptive(order):
        # input tables depend on x only: bits 0 and 1 of each table, replicated over prior outputs
        f = [rng.getrandbits(2) for _ in range(2)]
        tables = []
        for j in range(2):
            t = 0
            for key in range(1 << (j + 1)):
                t |= ((f[order[j]] >> (key & 1)) & 1) << key
            tables.append(t)
        return f, tables

    state = rng.getstate()
    fa, ta = nonadaptive((0, 1))
    rng.setstate(state)
    fa2, ta2 = nonadaptive((1, 0))
    assert fa == fa2
    out = rng.getrandbits(8)
    bob = PartyStrategy((0, 1), (rng.getrandbits(2), rng.getrandbits(4)), rng.getrandbits(8))
    w1 = Wiring(2, PartyStrategy((0, 1), tuple(ta), out), bob)
    w2 = Wiring(2, PartyStrategy((1, 0), tuple(ta2), out), bob)
    assert apply_wiring(w1, [b1, b2]) == apply_wiring(w2, [b1, b2])


def test_differing_orders_allowed():
    a = PartyStrategy((0, 1), (0b10, 0b0110), truth_table(lambda x, o1, o2: o1 ^ o2, 3))
    b = PartyStrategy((1, 0), (0b10, 0b1000), truth_table(lambda y, o1, o2: o1 & o2, 3))
    w = Wiring(2, a, b)
    bxs = [make_isotropic(F(3, 4)), make_correlated_nl(F(1, 3))]
    assert apply_wiring(w, bxs) == wiring_oracle(w, bxs)


def test_local_inputs_give_local_output(rng):
    L = local_polytope()
    locs = local_deterministic_boxes()
    for _ in range(25):
        n = rng.randint(1, 2)
        out = apply_wiring(random_wiring(rng, n), [rng.choice(locs) for _ in range(n)])
        assert in_hull(out, L).inside


def test_float_tables():
    b = make_section_box(F(1, 3), F(1, 4))
    exact = apply_wiring(distillation_wiring(), [b, b])
    approx = wire_tables(distillation_wiring(), [[float(v) for v in b.p]] * 2)
    assert max(abs(float(e) - a) for e, a in zip(exact.p, approx)) < 1e-15


def test_wiring_json_roundtrip(rng):
    for n in (1, 2, 3):
        w = random_wiring(rng, n)
        assert Wiring.from_json(json.dumps(w.to_json())) == w
        assert Wiring.from_json(w.to_json()) == w


def test_conjugate_identity():
    w = distillation_wiring()
    c = conjugate_wiring(IDENTITY, IDENTITY, w)
    assert c.n == w.n
    for b in (make_isotropic(F(3, 5)), make_section_box(F(1, 4), F(1, 2))):
        assert apply_wiring(c, [b, b]) == apply_wiring(w, [b, b])


@settings(max_examples=60)
@given(st.sampled_from(group()), st.sampled_from(group()), boxes, boxes, seeds)
def test_conjugation_identity(g_in, g_out, b1, b2, seed):
    if g_in.swap != g_out.swap:
        with pytest.raises(ValueError):
            conjugate_wiring(g_in, g_out, distillation_wiring())
        return
    w = random_wiring(random.Random(seed), 2)
    c = conjugate_wiring(g_in, g_out, w)
    assert c.n == 2
    want = g_out.apply(apply_wiring(w, [g_in.inverse().apply(b1), g_in.inverse().apply(b2)]))
    assert apply_wiring(c, [b1, b2]) == want


def test_random_box_is_valid(rng):
    assert all(validate(random_box(rng)).ok for _ in range(50))
