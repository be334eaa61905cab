"""AND-wiring escape from the noisy-PR polytope."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..box import Box, as_fraction, chsh_values, make_isotropic
from ..geometry import (
    LinearFunctional,
    MembershipCertificate,
    ParameterError,
    facet_q,
    in_hull,
    r_b_polytope,
    tilted_ch,
)
from ..wiring import and_closed_form

# The two printed versions of the escape condition differ in the coefficient of
# z_-^n. Exact evaluation of I(q) on the AND output selects "1+q"
# (see tests/test_escape.py); "q" is kept for comparison only.
COEFFICIENT_FORMS = ("1+q", "q")


def _check(n: int, eps) -> Fraction:
    eps = as_fraction(eps)
    if n < 2:
        raise ParameterError("n must be >= 2")
    if not Fraction(1, 2) < eps < 1:
        raise ParameterError(f"eps must lie in (1/2, 1), got {eps}")
    return eps


def and_escape_lhs(n: int, eps, form: str = "1+q") -> Fraction:
    """``2^(1-n) - 3 z+^n + k z-^n`` with ``z = (1 +- eps)/4`` and ``k`` per ``form``."""
    eps = _check(n, eps)
    q = facet_q(eps)
    zp, zm = (1 + eps) / 4, (1 - eps) / 4
    k = {"1+q": 1 + q, "q": q}[form]
    return Fraction(2) ** (1 - n) - 3 * zp ** n + k * zm ** n


def and_escape_condition(n: int, eps, form: str = "1+q") -> tuple:
    lhs = and_escape_lhs(n, eps, form)
    return lhs, lhs < 0


def escape_threshold(n: int):
    """Exact root in (1/2, 1) of the escape condition for ``n`` AND-wired copies.

    Returns a ``Fraction`` when the root is rational, otherwise a sympy
    algebraic number; ``None`` if the condition never changes sign.
    """
    import sympy

    e = sympy.symbols("e")
    # multiply through by 4^n (1 - e) > 0: (1+q)(1-e) = 3e - 1
    poly = sympy.expand(2 ** (n + 1) * (1 - e) - 3 * (1 + e) ** n * (1 - e) + (3 * e - 1) * (1 - e) ** n)
    roots = [r for r in sympy.Poly(poly, e).real_roots()
             if sympy.Rational(1, 2) < r < 1]
    if not roots:
        return None
    r = roots[0]
    if r.is_Rational:
        return Fraction(int(r.p), int(r.q))
    return r


@dataclass(frozen=True)
class EscapeResult:
    n: int
    eps: Fraction
    q: Fraction
    box: Box
    facet: LinearFunctional
    value: Fraction  # I(q) on the produced box; negative means escape
    violated: bool
    chsh_not_increased: bool
    separator: MembershipCertificate | None = None

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "eps": str(self.eps),
            "q": str(self.q),
            "box": self.box.to_json(),
            "facet": self.facet.to_json(),
            "facet_value": str(self.value),
            "violated": self.violated,
            "chsh_not_increased": self.chsh_not_increased,
        }
        if self.separator is not None:
            out["membership"] = self.separator.to_json()
        return out


def and_escape_box(n: int, eps, with_lp: bool = False) -> EscapeResult:
    """Apply the ``n``-box AND wiring to isotropic boxes and test the tilted-CH facet."""
    eps = _check(n, eps)
    q = facet_q(eps)
    facet = tilted_ch(q)
    iso = make_isotropic(eps)
    out = and_closed_form(iso, n)
    value = facet(out)
    chsh_ok = max(chsh_values(out)) <= max(chsh_values(iso))
    sep = in_hull(out, r_b_polytope(4 * eps)) if with_lp else None
    return EscapeResult(n, eps, q, out, facet, value, value < 0, chsh_ok, sep)
