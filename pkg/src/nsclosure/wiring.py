"""Deterministic N-box wirings and their exact action on boxes.

Truth tables are integer bitmasks. Argument packing puts the party's own
input bit at bit 0:

* input table of usage step ``j`` (0-based) is indexed by
  ``x | o_0 << 1 | ... | o_{j-1} << j`` where ``o_k`` is the output of the
  box used at step ``k`` (usage order);
* the output table is indexed by ``x | a_0 << 1 | ... | a_{N-1} << N`` with
  box outputs in box-index order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Callable, Sequence

from .box import BITS, Box, idx
from .symmetry import Relabeling


class ArityError(ValueError):
    pass


def truth_table(fn: Callable[..., int], nargs: int) -> int:
    """Bitmask with bit ``k`` set iff ``fn`` of the little-endian bits of ``k`` is 1."""
    mask = 0
    for k in range(1 << nargs):
        if fn(*((k >> i) & 1 for i in range(nargs))) & 1:
            mask |= 1 << k
    return mask


def _bit(table: int, key: int) -> int:
    return (table >> key) & 1


@dataclass(frozen=True)
class PartyStrategy:
    order: tuple
    input_tables: tuple
    output_table: int

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(i) for i in self.order))
        object.__setattr__(self, "input_tables", tuple(int(t) for t in self.input_tables))
        n = len(self.order)
        if sorted(self.order) != list(range(n)):
            raise ValueError(f"order {self.order} is not a permutation of 0..{n - 1}")
        if len(self.input_tables) != n:
            raise ArityError(f"{len(self.input_tables)} input tables for {n} boxes")
        for j, t in enumerate(self.input_tables):
            if not 0 <= t < 1 << (1 << (j + 1)):
                raise ValueError(f"input table {j} has more than 2^{j + 1} entries")
        if not 0 <= self.output_table < 1 << (1 << (n + 1)):
            raise ValueError(f"output table has more than 2^{n + 1} entries")

    @property
    def n(self) -> int:
        return len(self.order)

    def run(self, x: int, outs: Sequence[int]) -> tuple:
        """Inputs issued to each box (box-index order) and the final output bit.

        ``outs`` holds the output every box would return, in box-index order.
        """
        inputs = [0] * self.n
        key = x
        for j, box in enumerate(self.order):
            inputs[box] = _bit(self.input_tables[j], key)
            key |= outs[box] << (j + 1)
        out_key = x
        for i, o in enumerate(outs):
            out_key |= o << (i + 1)
        return tuple(inputs), _bit(self.output_table, out_key)

    @cached_property
    def behaviour(self) -> dict:
        """``(x, outs) -> (inputs, output)`` for every ``x`` and output tuple."""
        return {(x, outs): self.run(x, outs)
                for x in BITS for outs in product(BITS, repeat=self.n)}

    def to_json(self) -> dict:
        return {"order": list(self.order), "input_tables": list(self.input_tables),
                "output_table": self.output_table}

    @classmethod
    def from_json(cls, obj) -> "PartyStrategy":
        return cls(tuple(obj["order"]), tuple(obj["input_tables"]), int(obj["output_table"]))


@dataclass(frozen=True)
class Wiring:
    n: int
    alice: PartyStrategy
    bob: PartyStrategy

    def __post_init__(self):
        if self.n < 1:
            raise ArityError("a wiring needs at least one box")
        if self.alice.n != self.n or self.bob.n != self.n:
            raise ArityError("party strategies disagree with the box count")

    def trajectories(self):
        """Yield ``(target_index, source_indices)`` for every (x, y, outputs) trajectory."""
        n = self.n
        outs = list(product(BITS, repeat=n))
        for x, y in product(BITS, BITS):
            alice = [(al, *self.alice.behaviour[(x, al)]) for al in outs]
            bob = [(be, *self.bob.behaviour[(y, be)]) for be in outs]
            for al, xin, a in alice:
                for be, yin, b in bob:
                    yield idx(x, y, a, b), tuple(idx(xin[j], yin[j], al[j], be[j]) for j in range(n))

    @cached_property
    def compiled(self) -> tuple:
        return tuple(self.trajectories())

    def to_json(self) -> dict:
        return {"n": self.n, "alice": self.alice.to_json(), "bob": self.bob.to_json()}

    @classmethod
    def from_json(cls, obj) -> "Wiring":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(int(obj["n"]), PartyStrategy.from_json(obj["alice"]), PartyStrategy.from_json(obj["bob"]))


_COMPILE_LIMIT = 4  # beyond this many boxes trajectories are streamed, not cached


def wire_tables(w: Wiring, tables: Sequence[Sequence]) -> list:
    """Apply ``w`` to raw 16-entry tables of any numeric type (exact or float)."""
    if len(tables) != w.n:
        raise ArityError(f"wiring takes {w.n} boxes, got {len(tables)}")
    out = [0] * 16
    terms = w.compiled if w.n <= _COMPILE_LIMIT else w.trajectories()
    if w.n == 2:
        t0, t1 = tables
        for target, (s0, s1) in terms:
            v0 = t0[s0]
            if v0:
                v1 = t1[s1]
                if v1:
                    out[target] += v0 * v1
        return out
    for target, sources in terms:
        prob = 1
        for t, s in zip(tables, sources):
            v = t[s]
            if not v:
                break
            prob *= v
        else:
            out[target] += prob
    return out


def apply_wiring(w: Wiring, boxes: Sequence[Box]) -> Box:
    if len(boxes) != w.n:
        raise ArityError(f"wiring takes {w.n} boxes, got {len(boxes)}")
    return Box([Fraction(v) for v in wire_tables(w, [b.p for b in boxes])])


def identity_wiring() -> Wiring:
    s = PartyStrategy((0,), (truth_table(lambda x: x, 1),), truth_table(lambda x, a: a, 2))
    return Wiring(1, s, s)


def distillation_wiring() -> Wiring:
    """Two-box protocol: Alice x1=x, x2=x^a1^1, a=a1^a2^1; Bob y1=y, y2=y*b1, b=b1^b2^1."""
    out = truth_table(lambda x, o1, o2: o1 ^ o2 ^ 1, 3)
    alice = PartyStrategy((0, 1), (truth_table(lambda x: x, 1), truth_table(lambda x, a1: x ^ a1 ^ 1, 2)), out)
    bob = PartyStrategy((0, 1), (truth_table(lambda y: y, 1), truth_table(lambda y, b1: y & b1, 2)), out)
    return Wiring(2, alice, bob)


def and_wiring(n: int) -> Wiring:
    """Every box gets the party input; the final output is the AND of all outputs."""
    if n < 1:
        raise ArityError("AND wiring needs n >= 1")
    inputs = tuple(truth_table(lambda x, *prev: x, j + 1) for j in range(n))
    out = truth_table(lambda x, *outs: int(all(outs)), n + 1)
    s = PartyStrategy(tuple(range(n)), inputs, out)
    return Wiring(n, s, s)


def and_closed_form(b: Box, n: int) -> Box:
    if n < 1:
        raise ArityError("AND closed form needs n >= 1")
    out = [Fraction(0)] * 16
    for x, y in product(BITS, BITS):
        p11 = b.prob(1, 1, x, y)
        p01 = (b.prob(0, 1, x, y) + p11) ** n - p11 ** n
        p10 = (b.prob(1, 0, x, y) + p11) ** n - p11 ** n
        q11 = p11 ** n
        out[idx(x, y, 1, 1)] = q11
        out[idx(x, y, 0, 1)] = p01
        out[idx(x, y, 1, 0)] = p10
        out[idx(x, y, 0, 0)] = 1 - p01 - p10 - q11
    return Box(out)


def swap_parties(w: Wiring) -> Wiring:
    return Wiring(w.n, w.bob, w.alice)


def _conjugate_strategy(s: PartyStrategy, i_in: int, o_in: tuple, i_out: int, o_out: tuple) -> PartyStrategy:
    # Each physical box B is presented to ``s`` as the relabeled box L_in B;
    # the final interface is relabeled by L_out.
    n = s.n

    def simulate(x, observed):
        # observed: physical outputs of the first len(observed) used boxes
        xw = x ^ i_out
        key = xw
        feeds, logical = [], {}
        for j, box in enumerate(s.order):
            x_c = _bit(s.input_tables[j], key)
            feeds.append(x_c ^ i_in)
            if j >= len(observed):
                break
            a_c = observed[j] ^ o_in[x_c]
            logical[box] = a_c
            key |= a_c << (j + 1)
        return xw, feeds, logical

    inputs = []
    for j in range(n):
        inputs.append(truth_table(lambda x, *obs: simulate(x, obs)[1][j], j + 1))

    def final(x, *outs):
        observed = [outs[box] for box in s.order]
        xw, _, logical = simulate(x, observed)
        key = xw
        for box in range(n):
            key |= logical[box] << (box + 1)
        return _bit(s.output_table, key) ^ o_out[x]

    return PartyStrategy(s.order, tuple(inputs), truth_table(final, n + 1))


def conjugate_wiring(g_in: Relabeling, g_out: Relabeling, w: Wiring) -> Wiring:
    """Wiring computing ``g_out(w(g_in^-1 B_1, ..., g_in^-1 B_N))``.

    Both relabelings must agree on the party swap; a swap on the constituent
    boxes alone cannot be realized by local circuitry.
    """
    if g_in.swap != g_out.swap:
        raise ValueError("g_in and g_out must both include or both omit the party swap")
    l_in = g_in.inverse().local_part()
    l_out = g_out.local_part()
    if g_in.swap:
        w = swap_parties(w)
        l_out = l_out.party_exchanged()
    alice = _conjugate_strategy(w.alice, l_in.alice_input_flip, l_in.alice_output_flip,
                                l_out.alice_input_flip, l_out.alice_output_flip)
    bob = _conjugate_strategy(w.bob, l_in.bob_input_flip, l_in.bob_output_flip,
                              l_out.bob_input_flip, l_out.bob_output_flip)
    return Wiring(w.n, alice, bob)


def random_strategy(rng, n: int) -> PartyStrategy:
    order = list(range(n))
    rng.shuffle(order)
    return PartyStrategy(tuple(order), tuple(rng.getrandbits(1 << (j + 1)) for j in range(n)),
                         rng.getrandbits(1 << (n + 1)))


def random_wiring(rng, n: int) -> Wiring:
    """Uniformly random deterministic ``n``-box wiring (``rng`` is a ``random.Random``)."""
    return Wiring(n, random_strategy(rng, n), random_strategy(rng, n))
