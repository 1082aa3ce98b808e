"""Per-distribution constraint sets of the discrete inner/outer bounds.

Every bound is a list of linear-in-rates inequalities

    c0*R0 + c1*R1 + ce*Re <= rhs

whose right-hand side is either a constant computed from the joint or
``[R1 + offset]^+`` (the equivocation terms written ``[R1 - I(X;Z|US)]^+``).
Membership at a fixed distribution is pointwise: the positive parts make the
sets non-convex in (R0, R1, Re), so they are never treated as polytopes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .channel import JointDist
from .errors import ValidationError, WrongInputClass
from .info import cond_mutual_information as I
from .info import positive_part, zeta

SLACK_TOL = 1e-9


class BoundId(enum.Enum):
    D_IN_TILDE = "d-in-tilde"
    D_OUT_TILDE = "d-out-tilde"
    D_IN = "d-in"
    D_OUT = "d-out"
    D_OUT_HAT = "d-out-hat"
    S_IN_TILDE = "s-in-tilde"
    S_OUT_TILDE = "s-out-tilde"
    S_IN = "s-in"
    S_OUT = "s-out"

    @classmethod
    def parse(cls, text):
        key = text.strip().lower().replace("_", "-")
        for b in cls:
            if b.value == key:
                return b
        raise ValidationError(f"unknown bound {text!r}; choose from {[b.value for b in cls]}")

    @property
    def input_class(self):
        return _INPUT_CLASS[self]

    @property
    def is_inner(self):
        return self in INNER

    @property
    def stochastic(self):
        return self.value.startswith("s-")


_INPUT_CLASS = {
    BoundId.D_IN_TILDE: "P1",
    BoundId.D_OUT_TILDE: "P1",
    BoundId.D_IN: "P1",
    BoundId.D_OUT: "P2",
    BoundId.D_OUT_HAT: "P1",
    BoundId.S_IN_TILDE: "P1",
    BoundId.S_OUT_TILDE: "P1",
    BoundId.S_IN: "Q1",
    BoundId.S_OUT: "Q2",
}
INNER = frozenset({BoundId.D_IN_TILDE, BoundId.D_IN, BoundId.S_IN_TILDE, BoundId.S_IN})
OUTER = frozenset(BoundId) - INNER


class Section(enum.Enum):
    """Cross-sections: the full region, its R0 = 0 slice, or its Re = R1 slice."""

    FULL = "full"
    R0_ZERO = "r0=0"
    RE_EQ_R1 = "re=r1"


@dataclass(frozen=True)
class RateTriple:
    R0: float
    R1: float
    Re: float

    def __post_init__(self):
        for name in ("R0", "R1", "Re"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")

    def as_tuple(self):
        return (self.R0, self.R1, self.Re)


@dataclass(frozen=True)
class Constraint:
    name: str
    c0: float
    c1: float
    ce: float
    rhs: float
    plus_offset: float | None = None

    def rhs_at(self, r1):
        if self.plus_offset is None:
            return self.rhs
        return positive_part(r1 + self.plus_offset)

    def slack(self, t: RateTriple) -> float:
        lhs = self.c0 * t.R0 + self.c1 * t.R1 + self.ce * t.Re
        return self.rhs_at(t.R1) - lhs


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    slacks: dict

    @property
    def min_slack(self):
        return min(self.slacks.values())


def _r0(name, rhs):
    return Constraint(name, 1, 0, 0, rhs)


def _r1(name, rhs):
    return Constraint(name, 0, 1, 0, rhs)


def _sum(name, rhs):
    return Constraint(name, 1, 1, 0, rhs)


def _re(name, rhs):
    return Constraint(name, 0, 0, 1, rhs)


def _re_plus(name, offset):
    return Constraint(name, 0, 0, 1, math.nan, plus_offset=offset)


RE_LE_R1 = Constraint("Re<=R1", 0, -1, 1, 0.0)


def _require_class(bound, joint):
    has_v = "V" in joint.axes
    if bound.input_class in ("Q1", "Q2") and not has_v:
        raise WrongInputClass(f"{bound.value} needs an input with an auxiliary V")
    if bound.input_class in ("P1", "P2") and has_v:
        raise WrongInputClass(f"{bound.value} takes a (U, S, X) input without V")
    if bound.input_class == "P1" and I(joint, "U", "YZ", "XS") > SLACK_TOL:
        raise WrongInputClass(f"{bound.value} needs a P1 input (U -> XS -> YZ)")


def bound_constraints(bound: BoundId, joint: JointDist) -> list[Constraint]:
    """The inequality list of ``bound`` evaluated at ``joint``."""
    _require_class(bound, joint)
    i_usy = I(joint, "US", "Y")
    i_uzs = I(joint, "U", "Z", "S")
    common = min(i_usy, i_uzs)
    if bound.input_class in ("Q1", "Q2"):
        i_vy = I(joint, "V", "Y", "US")
        i_vz = I(joint, "V", "Z", "US")
        return [
            RE_LE_R1,
            _r0("R0<=min{I(US;Y),I(U;Z|S)}", common),
            _sum("R0+R1<=I(V;Y|US)+min{..}", i_vy + common),
            _re("Re<=[I(V;Y|US)-I(V;Z|US)]+", positive_part(i_vy - i_vz)),
        ]

    i_xy = I(joint, "X", "Y", "US")
    i_xz = I(joint, "X", "Z", "US")
    r0 = _r0("R0<=min{I(US;Y),I(U;Z|S)}", common)
    if bound is BoundId.D_IN_TILDE:
        return [
            r0,
            _r1("R1<=I(X;Y|US)", i_xy),
            _re_plus("Re<=[R1-I(X;Z|US)]+", -i_xz),
        ]
    if bound is BoundId.D_OUT_TILDE:
        return [
            r0,
            _r1("R1<=I(X;YZ|US)", I(joint, "X", "YZ", "US")),
            _sum("R0+R1<=I(XS;Y)", I(joint, "XS", "Y")),
            _re_plus("Re<=[R1-I(X;Z|US)]+", -i_xz),
        ]
    if bound in (BoundId.D_IN, BoundId.D_OUT):
        offset = -i_xz
        if bound is BoundId.D_OUT:
            offset += I(joint, "U", "Z", "XS")
        return [
            r0,
            _sum("R0+R1<=I(X;Y|US)+min{..}", i_xy + common),
            _re_plus(
                "Re<=[R1-I(X;Z|US)+I(U;Z|XS)]+" if bound is BoundId.D_OUT else "Re<=[R1-I(X;Z|US)]+",
                offset,
            ),
            _re("Re<=[I(X;Y|US)-I(X;Z|US)]+", positive_part(i_xy - i_xz)),
        ]
    if bound is BoundId.D_OUT_HAT:
        z = zeta(joint)
        return [
            _r0("R0<=min{I(U;Y),I(U;Z|S)}", min(I(joint, "U", "Y"), i_uzs)),
            _sum("R0+R1<=I(X;Y|US)+min{I(US;Y),I(U;Z|S)+zeta}", i_xy + min(i_usy, i_uzs + z)),
            _re_plus("Re<=[R1-I(X;Z|US)]+", -i_xz),
            _re("Re<=[I(X;Y|US)-I(X;Z|US)+zeta]+", positive_part(i_xy - i_xz + z)),
        ]
    if bound is BoundId.S_IN_TILDE:
        return [
            RE_LE_R1,
            r0,
            _r1("R1<=I(X;Y|US)", i_xy),
            _re("Re<=[I(X;Y|US)-I(X;Z|US)]+", positive_part(i_xy - i_xz)),
        ]
    if bound is BoundId.S_OUT_TILDE:
        return [
            RE_LE_R1,
            r0,
            _r1("R1<=I(X;YZ|US)", I(joint, "X", "YZ", "US")),
            _sum("R0+R1<=I(XS;Y)", I(joint, "XS", "Y")),
            _re("Re<=I(X;Y|ZUS)", I(joint, "X", "Y", "ZUS")),
        ]
    raise AssertionError(bound)  # pragma: no cover


def _section_slacks(t: RateTriple, section: Section):
    if section is Section.R0_ZERO:
        return {"R0=0": -t.R0}
    if section is Section.RE_EQ_R1:
        return {"Re=R1": -abs(t.Re - t.R1)}
    return {}


def evaluate(constraints, t: RateTriple, section=Section.FULL) -> CheckResult:
    slacks = {c.name: c.slack(t) for c in constraints}
    slacks.update(_section_slacks(t, section))
    return CheckResult(all(v >= -SLACK_TOL for v in slacks.values()), slacks)


def constraint_check(
    bound: BoundId, joint: JointDist, t: RateTriple, section: Section = Section.FULL
) -> CheckResult:
    """Evaluate the inequalities of ``bound`` at ``joint`` for the triple ``t``.

    ``ok`` is true iff every slack is at least -1e-9.
    """
    return evaluate(bound_constraints(bound, joint), t, section)


# Caps derived from a constraint list; used by boundary tracing.


def r0_cap(constraints) -> float:
    caps = [c.rhs / c.c0 for c in constraints if c.ce == 0 and c.c0 > 0]
    return max(0.0, min(caps)) if caps else math.inf


def r1_cap(constraints, r0) -> float:
    """Largest R1 compatible with ``r0`` (``-inf`` if ``r0`` is infeasible)."""
    if r0 > r0_cap(constraints) + 1e-15:
        return -math.inf
    caps = [(c.rhs - c.c0 * r0) / c.c1 for c in constraints if c.ce == 0 and c.c1 > 0]
    return min(caps) if caps else math.inf


def re_cap(constraints, r0, r1) -> float:
    caps = [(c.rhs_at(r1) - c.c0 * r0 - c.c1 * r1) / c.ce for c in constraints if c.ce > 0]
    return min(caps) if caps else math.inf
