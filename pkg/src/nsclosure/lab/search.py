"""Exhaustive search over deterministic two-box wirings.

Each party's strategy is reduced to its induced map ``(input, box outputs) ->
(box inputs, final output)``; strategies inducing the same map are
identified. That leaves 112 distinct input maps per party, each combined
with all 256 output tables. For one pair of input maps and one pair of
vertices the facet value of all ``256 x 256`` output-table combinations is
evaluated at once with exact integer arithmetic (tables scaled by a common
denominator).

Symmetry reduction uses local relabelings only: pre-composing a wiring with
a local relabeling of both boxes maps vertex pairs to vertex pairs, and
post-composing maps facets to facets, so one representative per orbit of
each suffices when the vertex and facet sets are invariant.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

import numpy as np

from ..box import BITS, Box
from ..geometry import LinearFunctional, VPolytope
from ..symmetry import local_group
from ..wiring import PartyStrategy, Wiring, and_wiring, apply_wiring, distillation_wiring, truth_table

log = logging.getLogger(__name__)

N_OUTPUT_TABLES = 256  # output bit as a function of (x, a0, a1)
RAW_STRATEGIES = 2 * 4 * 16 * N_OUTPUT_TABLES  # orders x first-input x second-input x output


@dataclass(frozen=True)
class InputMap:
    order: tuple
    tables: tuple
    inputs: tuple  # inputs[x][alpha] = (input to box 0, input to box 1); alpha = a0 | a1 << 1


def input_maps() -> list[InputMap]:
    """Distinct induced input maps, first raw representative kept."""
    seen = {}
    for order in ((0, 1), (1, 0)):
        for f0 in range(4):
            for f1 in range(16):
                s = PartyStrategy(order, (f0, f1), 0)
                key = tuple(tuple(s.run(x, (al & 1, al >> 1))[0] for al in range(4)) for x in BITS)
                seen.setdefault(key, InputMap(order, (f0, f1), key))
    return list(seen.values())


def strategy_from(im: InputMap, t0: int, t1: int) -> PartyStrategy:
    """Party strategy with input map ``im`` and output tables ``t0`` (x=0), ``t1`` (x=1) over alpha."""
    out = truth_table(lambda x, a0, a1: ((t1 if x else t0) >> (a0 | a1 << 1)) & 1, 3)
    return PartyStrategy(im.order, im.tables, out)


def canonical_strategy_count() -> int:
    return len(input_maps()) * N_OUTPUT_TABLES


@dataclass
class Violation:
    wiring: Wiring
    pair: tuple  # vertex indices
    inputs: tuple  # the two boxes
    output: Box
    functional: LinearFunctional
    amount: Fraction  # functional value on the output, negative

    def verify(self) -> bool:
        out = apply_wiring(self.wiring, list(self.inputs))
        return out == self.output and self.functional(out) == self.amount < 0

    def to_json(self) -> dict:
        return {"wiring": self.wiring.to_json(), "pair": list(self.pair),
                "inputs": [b.to_json() for b in self.inputs], "output": self.output.to_json(),
                "functional": self.functional.to_json(), "amount": str(self.amount)}

    @classmethod
    def from_json(cls, obj) -> "Violation":
        return cls(Wiring.from_json(obj["wiring"]), tuple(obj["pair"]),
                   tuple(Box.from_json(b) for b in obj["inputs"]), Box.from_json(obj["output"]),
                   LinearFunctional.from_json(obj["functional"]), Fraction(obj["amount"]))


@dataclass
class SearchReport:
    parameters: dict
    counters: dict
    complete: bool
    violations: list = field(default_factory=list)  # witnesses, canonical order
    tracked: list = field(default_factory=list)  # named wirings evaluated on every pair and facet
    elapsed: float = 0.0

    @property
    def violation_count(self) -> int:
        return self.counters["violating_wirings"]

    @property
    def closed(self) -> bool:
        return self.complete and self.violation_count == 0

    @property
    def status(self) -> str:
        if self.violation_count:
            return "violations"
        return "closed" if self.complete else "budget_exhausted"

    def verify(self) -> bool:
        return all(v.verify() for v in self.violations)

    def to_json(self) -> dict:
        return {"status": self.status, "complete": self.complete, "parameters": self.parameters,
                "counters": self.counters, "violations": [v.to_json() for v in self.violations],
                "tracked": self.tracked, "elapsed_seconds": self.elapsed}


def _vertex_perm(poly: VPolytope, g) -> Optional[list]:
    index = {v.p: i for i, v in enumerate(poly.vertices)}
    out = []
    for v in poly.vertices:
        j = index.get(g.apply(v).p)
        if j is None:
            return None
        out.append(j)
    return out


def pair_representatives(poly: VPolytope, use_symmetry: bool = True) -> list[tuple]:
    n = len(poly.vertices)
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    perms = [_vertex_perm(poly, g) for g in local_group()] if use_symmetry else []
    if not perms or any(p is None for p in perms):
        return pairs
    reps, done = [], set()
    for i, j in pairs:
        if (i, j) in done:
            continue
        reps.append((i, j))
        for p in perms:
            a, b = p[i], p[j]
            done.add((min(a, b), max(a, b)))
    return reps


def facet_representatives(facets: Sequence[LinearFunctional], use_symmetry: bool = True) -> list[int]:
    keys = [f.ns_key() for f in facets]
    keyset = set(keys)
    elements = local_group()
    if not use_symmetry or any(f.relabel(g).ns_key() not in keyset for f in facets for g in elements):
        return list(range(len(facets)))
    reps, done = [], set()
    for i, f in enumerate(facets):
        if keys[i] in done:
            continue
        reps.append(i)
        done.update(f.relabel(g).ns_key() for g in elements)
    return reps


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _integer_functional(f: LinearFunctional) -> tuple:
    k = _lcm([c.denominator for c in f.coefficients] + [f.constant.denominator])
    return np.array([int(c * k) for c in f.coefficients], dtype=np.int64), int(f.constant * k)


# one-hot selectors: SEL[t, alpha, a] = 1 iff bit alpha of table t equals a
_SEL = np.zeros((16, 4, 2), dtype=np.int64)
for _t, _al in product(range(16), range(4)):
    _SEL[_t, _al, (_t >> _al) & 1] = 1
_UBITS = np.array([[(u >> be) & 1 for be in range(4)] for u in range(16)])


class _Engine:
    """Exact integer evaluation of facet values for all output tables at once."""

    def __init__(self, maps: list[InputMap]):
        self.maps = maps
        ins = np.array([m.inputs for m in maps], dtype=np.int64)  # (S, x, alpha, box)
        alpha = np.arange(4)
        a0, a1 = alpha & 1, alpha >> 1
        S = len(maps)
        # flat table index contributions of Alice (x, alpha) and Bob (y, beta) per box
        self.alice = [8 * ins[:, :, :, j] + 2 * (a0 if j == 0 else a1)[None, None, :] for j in (0, 1)]
        self.bob = [4 * ins[:, :, :, j] + (a0 if j == 0 else a1)[None, None, :] for j in (0, 1)]
        self.S = S

    def trajectory_weights(self, P0: np.ndarray, P1: np.ndarray, sa: int) -> np.ndarray:
        """T[sB, x, y, alpha, beta] for Alice map ``sa`` against every Bob map."""
        i0 = self.alice[0][sa][None, :, None, :, None] + self.bob[0][:, None, :, None, :]
        i1 = self.alice[1][sa][None, :, None, :, None] + self.bob[1][:, None, :, None, :]
        return P0[i0] * P1[i1]

    def partial_values(self, P0, P1, coeffs: np.ndarray, const: int, sa: int) -> tuple:
        """Per-y halves ``(H0, H1)`` with value = ``H0[..., u0] + H1[..., u1]``, shape (sB, t0, t1, u).

        Values are scaled by the integer scale factors; ``const`` is folded into ``H0``.
        """
        T = self.trajectory_weights(P0, P1, sa)
        C = coeffs.reshape(2, 2, 2, 2)  # [x, y, a, b]
        csel = np.einsum("tpa,xyab->xytpb", _SEL, C)  # [x, y, t, alpha, b]
        A1 = np.einsum("sxype,xytpb->sxtyeb", T, csel)  # (sB, x, t, y, beta, b)
        # Bob's output table u picks b = bit beta of u for every beta
        Nx = sum(A1[..., be, :][..., _UBITS[:, be]] for be in range(4))  # (sB, x, t, y, u)
        N = Nx[:, 0, :, None] + Nx[:, 1, None, :]  # (sB, t0, t1, y, u)
        return N[..., 0, :] + const, N[..., 1, :]

    def values(self, P0, P1, coeffs: np.ndarray, const: int, sa: int) -> np.ndarray:
        """Facet values, shape (sB, t0, t1, u0, u1), scaled by the integer scale factors."""
        H0, H1 = self.partial_values(P0, P1, coeffs, const, sa)
        return H0[..., :, None] + H1[..., None, :]


def _scan_unit(args):
    """Violation count, minimum value and its flat argmin for every Bob map."""
    engine, P0, P1, coeffs, const, sa = args
    H0, H1 = engine.partial_values(P0, P1, coeffs, const, sa)
    S = engine.S
    H0 = H0.reshape(S, 256, 16)
    H1 = H1.reshape(S, 256, 16)
    u0, u1 = H0.argmin(-1), H1.argmin(-1)
    rowmin = np.take_along_axis(H0, u0[..., None], -1)[..., 0] + np.take_along_axis(H1, u1[..., None], -1)[..., 0]
    t = rowmin.argmin(1)
    rows = np.arange(S)
    mins = rowmin[rows, t]
    arg = ((t * 16 + u0[rows, t]) * 16) + u1[rows, t]
    counts = np.zeros(S, dtype=np.int64)
    s_idx, t_idx = np.nonzero(rowmin < 0)
    if len(s_idx):
        full = H0[s_idx, t_idx][:, :, None] + H1[s_idx, t_idx][:, None, :]
        np.add.at(counts, s_idx, (full < 0).sum(axis=(1, 2)))
    return counts, mins, arg


def _witness(maps, sa, sb, flat) -> Wiring:
    t0, t1, u0, u1 = np.unravel_index(flat, (16, 16, 16, 16))
    return Wiring(2, strategy_from(maps[sa], int(t0), int(t1)), strategy_from(maps[sb], int(u0), int(u1)))


def tracked_wirings() -> dict:
    return {"AND": and_wiring(2), "distillation": distillation_wiring()}


def two_box_closure_search(
    poly: VPolytope,
    facets: Sequence[LinearFunctional],
    budget: Optional[int] = None,
    workers: int = 1,
    max_witnesses: int = 50,
    use_symmetry: bool = True,
) -> SearchReport:
    """Check every deterministic two-box wiring on every vertex pair against ``facets``.

    ``budget`` caps the number of (input-map pair, vertex pair, facet) cells.
    """
    start = time.perf_counter()
    maps = input_maps()
    engine = _Engine(maps)
    pairs = pair_representatives(poly, use_symmetry)
    frep = facet_representatives(facets, use_symmetry)
    nv = len(poly.vertices)
    scale = _lcm(v.denominator for b in poly.vertices for v in b.p)
    tables = [np.array([int(v * scale) for v in b.p], dtype=np.int64) for b in poly.vertices]
    ifacets = {k: _integer_functional(facets[k]) for k in frep}

    units = []
    for pi, (i, j) in enumerate(pairs):
        for k in frep:
            coeffs, const = ifacets[k]
            for sa in range(len(maps)):
                units.append((pi, k, sa, (engine, tables[i], tables[j], coeffs, const * scale * scale, sa)))
    total_cells = len(units) * len(maps)
    if budget is not None:
        units = units[: max(0, budget // len(maps))]

    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            results = pool.map(_scan_unit, [u[3] for u in units], chunksize=8)
    else:
        results = [_scan_unit(u[3]) for u in units]

    violating_cells = violating_wirings = 0
    witnesses, best = [], None
    for (pi, k, sa, _), (counts, mins, arg) in zip(units, results):
        for sb in np.nonzero(counts)[0]:
            violating_cells += 1
            violating_wirings += int(counts[sb])
            cand = (int(mins[sb]), pi, k, sa, int(sb), int(arg[sb]))
            if len(witnesses) < max_witnesses:
                witnesses.append(cand)
            if best is None or cand[0] < best[0]:
                best = cand
    if best is not None and best not in witnesses:
        witnesses.append(best)

    violations = []
    for _, pi, k, sa, sb, flat in witnesses:
        w = _witness(maps, sa, sb, flat)
        i, j = pairs[pi]
        inputs = (poly.vertices[i], poly.vertices[j])
        out = apply_wiring(w, list(inputs))
        violations.append(Violation(w, (i, j), inputs, out, facets[k], facets[k](out)))

    tracked = []
    for name, w in tracked_wirings().items():
        for i, j in pairs:
            out = apply_wiring(w, [poly.vertices[i], poly.vertices[j]])
            worst = min(range(len(facets)), key=lambda k: facets[k](out))
            value = facets[worst](out)
            tracked.append({"wiring": name, "pair": [i, j], "facet": facets[worst].name,
                            "value": str(value), "violated": value < 0})

    n_canon = canonical_strategy_count()
    scanned = len(units) * len(maps)
    report = SearchReport(
        parameters={
            "vertices": nv,
            "facets": len(facets),
            "facet_representatives": len(frep),
            "vertex_pairs_unordered": nv * (nv + 1) // 2,
            "vertex_pair_representatives": len(pairs),
            "raw_strategies_per_party": RAW_STRATEGIES,
            "canonical_strategies_per_party": n_canon,
            "input_maps_per_party": len(maps),
            "output_table_pairs_per_cell": N_OUTPUT_TABLES ** 2,
            "symmetry": bool(use_symmetry),
        },
        counters={
            "cells_total": total_cells,
            "cells_scanned": scanned,
            "wirings_evaluated": scanned * N_OUTPUT_TABLES ** 2,
            "violating_cells": violating_cells,
            "violating_wirings": violating_wirings,
        },
        complete=scanned == total_cells,
        violations=violations,
        tracked=tracked,
        elapsed=time.perf_counter() - start,
    )
    log.info("two-box search: %s, %d/%d cells, %d violating wirings",
             report.status, scanned, total_cells, violating_wirings)
    return report
