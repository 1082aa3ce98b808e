"""Entropies, conditional mutual informations and information densities.

All quantities are in bits. Variable sets are written as strings of axis
letters, e.g. ``cond_mutual_information(joint, "X", "Y", "US")`` for
I(X;Y|US).
"""

from __future__ import annotations

import numpy as np

from .channel import JointDist
from .errors import OverlappingSets, UnknownKind, ValidationError

MI_CLAMP = 1e-10

# kind -> (a, b, c) for log p(ab|c) / (p(a|c) p(b|c)), or (a, None, c) for
# the self-information -log p(a|c).
DENSITY_KINDS = {
    "UZ|S": ("U", "Z", "S"),
    "SY": ("S", "Y", ""),
    "UY|S": ("U", "Y", "S"),
    "XY|US": ("X", "Y", "US"),
    "XZ|US": ("X", "Z", "US"),
    "Z|XS": ("Z", None, "XS"),
    "Z|US": ("Z", None, "US"),
}


def varset(spec) -> frozenset:
    if isinstance(spec, str):
        letters = [c for c in spec if not c.isspace() and c != ","]
    else:
        letters = list(spec)
    return frozenset(letters)


def _h(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def joint_entropy(joint: JointDist, names) -> float:
    names = varset(names)
    if not names:
        return 0.0
    key = ("H", names)
    hit = joint._cache.get(key)
    if hit is None:
        hit = _h(joint.marginal(names))
        joint._cache[key] = hit
    return hit


def entropy(joint: JointDist, a, c="") -> float:
    """H(A|C)."""
    a, c = varset(a), varset(c)
    if not a:
        raise ValidationError("entropy needs a non-empty variable set")
    val = joint_entropy(joint, a | c) - joint_entropy(joint, c)
    return 0.0 if -MI_CLAMP < val < 0 else val


def cond_mutual_information(joint: JointDist, a, b, c="") -> float:
    """I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C).

    Tiny negative round-off (above -1e-10) is clamped to 0.
    """
    a, b, c = varset(a), varset(b), varset(c)
    if not a or not b:
        raise ValidationError("mutual information needs non-empty A and B")
    if a & b or a & c or b & c:
        raise OverlappingSets(f"sets {sorted(a)}, {sorted(b)}, {sorted(c)} overlap")
    # constant (size-1) variables carry no information; dropping them makes
    # e.g. I(S;Y|U) exactly 0 when |S| = 1
    sizes = joint.sizes
    a, b, c = ({v for v in x if sizes.get(v, 2) > 1} for x in (a, b, c))
    if not a or not b:
        return 0.0
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    val = (
        joint_entropy(joint, a | c)
        + joint_entropy(joint, b | c)
        - joint_entropy(joint, a | b | c)
        - joint_entropy(joint, c)
    )
    return 0.0 if -MI_CLAMP < val < 0 else val


def positive_part(x: float) -> float:
    return max(0.0, x)


def delta_gap(joint: JointDist) -> float:
    """I(X;Z|YUS), the per-distribution gap between the two Theorem-1 bounds."""
    return cond_mutual_information(joint, "X", "Z", "YUS")


def zeta(joint: JointDist) -> float:
    """I(S;Y|U) - I(S;Z|U); may be negative."""
    return cond_mutual_information(joint, "S", "Y", "U") - cond_mutual_information(
        joint, "S", "Z", "U"
    )


def density_table(joint: JointDist, kind: str):
    """Per-symbol density for ``kind`` as a lookup table.

    Returns ``(table, order)`` where ``order`` lists the variables indexing
    the table (in the joint's canonical axis order). Zero conditionals give
    -inf for the mutual-information kinds and +inf for the self-information
    kinds Z|XS and Z|US.
    """
    try:
        a, b, c = DENSITY_KINDS[kind]
    except KeyError:
        raise UnknownKind(f"unknown density kind {kind!r}") from None
    a, c = varset(a), varset(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        if b is None:
            order = joint.order(a | c)
            p_ac = joint.marginal(a | c)
            p_c = _expand(joint, c, order)
            table = -np.log2(p_ac / p_c)
            table = np.where(p_ac > 0, table, np.inf)
        else:
            b = varset(b)
            order = joint.order(a | b | c)
            p_abc = joint.marginal(a | b | c)
            num = p_abc * _expand(joint, c, order)
            den = _expand(joint, a | c, order) * _expand(joint, b | c, order)
            table = np.log2(num / den)
            table = np.where(p_abc > 0, table, -np.inf)
    return table, order


def _expand(joint, names, order):
    """Marginal over ``names`` broadcastable against the ``order`` axes."""
    if not names:
        return np.ones((1,) * len(order))
    m = joint.marginal(names)
    shape = [joint.sizes[v] if v in names else 1 for v in order]
    return m.reshape(shape)


def information_density(joint: JointDist, kind: str, seqs):
    """(1/n) sum_i of the per-symbol density ``kind`` along the sequences.

    ``seqs`` maps variable letters to integer arrays whose last axis is time,
    e.g. ``{"X": x, "Y": y, "U": u, "S": s}`` for kind ``"XY|US"``. Leading
    axes broadcast, so a whole codebook can be scored at once. Returns a float
    for 1-D inputs and an array otherwise.
    """
    table, order = density_table(joint, kind)
    arrays = np.broadcast_arrays(*[np.asarray(seqs[v]) for v in order])
    n = arrays[0].shape[-1]
    if n == 0:
        raise ValidationError("sequences must be non-empty")
    with np.errstate(invalid="ignore"):
        out = table[tuple(arrays)].sum(axis=-1) / n
    return float(out) if np.ndim(out) == 0 else out
