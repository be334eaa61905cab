"""Local relabeling symmetries of the 2-input/2-output scenario.

An element is a local relabeling ``L`` optionally followed by the party swap
``S``. The local part acts as::

    (L P)(a, b | x, y) = P(a ^ oA[x], b ^ oB[y] | x ^ iA, y ^ iB)

and ``(S P)(a, b | x, y) = P(b, a | y, x)``. Every element acts on the 16
flat table indices as a permutation ``perm`` with ``(g P)[k] = P[perm[k]]``.
The group has order 128.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .box import BITS, INDICES, Box, idx


@dataclass(frozen=True)
class Relabeling:
    swap: bool = False
    alice_input_flip: int = 0
    alice_output_flip: tuple = (0, 0)
    bob_input_flip: int = 0
    bob_output_flip: tuple = (0, 0)
    perm: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alice_output_flip", tuple(self.alice_output_flip))
        object.__setattr__(self, "bob_output_flip", tuple(self.bob_output_flip))
        object.__setattr__(self, "perm", self._perm())

    def _perm(self) -> tuple:
        iA, oA = self.alice_input_flip, self.alice_output_flip
        iB, oB = self.bob_input_flip, self.bob_output_flip
        perm = []
        for x, y, a, b in INDICES:
            if self.swap:
                x, y, a, b = y, x, b, a
            perm.append(idx(x ^ iA, y ^ iB, a ^ oA[x], b ^ oB[y]))
        return tuple(perm)

    @property
    def is_local(self) -> bool:
        return not self.swap

    def local_part(self) -> "Relabeling":
        return Relabeling(False, self.alice_input_flip, self.alice_output_flip,
                          self.bob_input_flip, self.bob_output_flip)

    def party_exchanged(self) -> "Relabeling":
        """Same element with Alice's and Bob's parameters exchanged."""
        return Relabeling(self.swap, self.bob_input_flip, self.bob_output_flip,
                          self.alice_input_flip, self.alice_output_flip)

    def compose(self, other: "Relabeling") -> "Relabeling":
        """``self o other``: apply ``other`` first."""
        perm = tuple(other.perm[k] for k in self.perm)
        return _by_perm()[perm]

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "Relabeling":
        inv = [0] * 16
        for k, j in enumerate(self.perm):
            inv[j] = k
        return _by_perm()[tuple(inv)]

    def apply(self, b: Box) -> Box:
        return Box([b.p[j] for j in self.perm])

    def apply_table(self, p):
        return [p[j] for j in self.perm]


IDENTITY = Relabeling()


@lru_cache(maxsize=None)
def group() -> tuple:
    """All 128 relabelings in a fixed order (swap bit outermost)."""
    elems = []
    for swap in (False, True):
        for iA, oA0, oA1, iB, oB0, oB1 in product(BITS, repeat=6):
            elems.append(Relabeling(swap, iA, (oA0, oA1), iB, (oB0, oB1)))
    return tuple(elems)


@lru_cache(maxsize=None)
def local_group() -> tuple:
    return tuple(g for g in group() if not g.swap)


@lru_cache(maxsize=None)
def _by_perm() -> dict:
    return {g.perm: g for g in group()}


def apply_relabeling(g: Relabeling, b: Box) -> Box:
    return g.apply(b)


def orbit(b: Box, elements=None) -> list[Box]:
    """Distinct images of ``b``, in group order of first appearance."""
    seen = {}
    for g in elements or group():
        img = g.apply(b)
        seen.setdefault(img.p, img)
    return list(seen.values())


def find_relabeling(src: Box, dst: Box, elements=None):
    """First group element mapping ``src`` onto ``dst``, or ``None``."""
    for g in elements or group():
        if g.apply(src) == dst:
            return g
    return None


def relabeling_to_json(g: Relabeling) -> dict:
    return {
        "swap": g.swap,
        "alice_input_flip": g.alice_input_flip,
        "alice_output_flip": list(g.alice_output_flip),
        "bob_input_flip": g.bob_input_flip,
        "bob_output_flip": list(g.bob_output_flip),
    }


def relabeling_from_json(obj) -> Relabeling:
    return Relabeling(bool(obj["swap"]), int(obj["alice_input_flip"]), tuple(obj["alice_output_flip"]),
                      int(obj["bob_input_flip"]), tuple(obj["bob_output_flip"]))
