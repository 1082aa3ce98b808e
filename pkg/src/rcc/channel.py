"""Finite relay channels, auxiliary input distributions and their joints.

A relay channel is stored as a tensor ``gamma[x, s, y, z]`` holding
Gamma(y, z | x, s). Auxiliary inputs come in three flavours:

* ``AuxInput``    p(u, s, x); the channel acts after (u, s, x), so
  U -> XS -> YZ holds by construction (set P1).
* ``AuxInputP2``  p(u, s, x, z) with U allowed to depend on the relay
  output; U -> XSZ -> Y holds by construction (set P2).
* ``AuxInputV``   p(u, v, s) p(x | v), which enforces US -> V -> X
  (sets Q1/Q2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    CardinalityExceeded,
    NegativeEntry,
    RowSumMismatch,
    SizeMismatch,
    ValidationError,
)

SUM_TOL = 1e-12
JOINT_TOL = 1e-11
CLASSIFY_TOL = 1e-9
POINT_MASS = 1.0 - 1e-9
MAX_JOINT_ENTRIES = 10**8

AXES = ("U", "V", "S", "X", "Y", "Z")


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_probabilities(p, what):
    if not np.all(np.isfinite(p)):
        raise ValidationError(f"{what} has non-finite entries")
    if np.any(p < 0):
        raise NegativeEntry(f"{what} has a negative entry ({p.min():.3e})")
    if np.any(p > 1 + SUM_TOL):
        raise ValidationError(f"{what} has an entry above 1 ({p.max():.17g})")


@dataclass(frozen=True, eq=False)
class RelayChannel:
    """Gamma(y, z | x, s) indexed ``gamma[x, s, y, z]``."""

    gamma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma", _frozen(self.gamma))

    @property
    def sizes(self):
        return self.gamma.shape

    @property
    def nx(self):
        return self.gamma.shape[0]

    @property
    def ns(self):
        return self.gamma.shape[1]

    @property
    def ny(self):
        return self.gamma.shape[2]

    @property
    def nz(self):
        return self.gamma.shape[3]

    @cached_property
    def gamma_y(self):
        """Gamma_Y(y | x, s), shape (x, s, y)."""
        return self.gamma.sum(axis=3)

    @cached_property
    def gamma_z(self):
        """Gamma_Z(z | x, s), shape (x, s, z)."""
        return self.gamma.sum(axis=2)

    def p1_cap(self):
        return self.nx * self.ns + 3

    def p2_cap(self):
        return self.nz * self.nx * self.ns + 3

    def q1_caps(self):
        m = self.nx * self.ns
        return m + 3, m * m + 4 * m + 3

    def q2_caps(self):
        m = self.nz * self.nx * self.ns
        return m + 3, m * m + 4 * m + 3


def validate_channel(tensor, sizes=None) -> RelayChannel:
    """Check that ``tensor[x, s, y, z]`` is a stochastic matrix and wrap it.

    Raises ``SizeMismatch`` if the shape disagrees with ``sizes``,
    ``NegativeEntry`` for negative probabilities and ``RowSumMismatch`` (with
    the worst (x, s) row and its deviation) when a row does not sum to one.
    """
    g = np.asarray(tensor, dtype=np.float64)
    if g.ndim != 4:
        raise SizeMismatch(f"channel tensor must have 4 axes, got {g.ndim}")
    if sizes is not None and tuple(sizes) != g.shape:
        raise SizeMismatch(f"tensor shape {g.shape} != declared sizes {tuple(sizes)}")
    if min(g.shape) < 1:
        raise SizeMismatch("alphabet sizes must be positive")
    _check_probabilities(g, "channel")
    dev = g.sum(axis=(2, 3)) - 1.0
    worst = np.unravel_index(np.argmax(np.abs(dev)), dev.shape)
    if abs(dev[worst]) > SUM_TOL:
        raise RowSumMismatch(tuple(int(i) for i in worst), float(dev[worst]))
    return RelayChannel(g)


def _check_total(p, what):
    _check_probabilities(p, what)
    dev = p.sum() - 1.0
    if abs(dev) > SUM_TOL:
        raise RowSumMismatch((), float(dev))


@dataclass(frozen=True, eq=False)
class AuxInput:
    """p(u, s, x) for a P1 point."""

    p_usx: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p_usx)
        if p.ndim != 3:
            raise SizeMismatch("p_usx must have 3 axes (u, s, x)")
        _check_total(p, "p_usx")
        object.__setattr__(self, "p_usx", p)

    @property
    def nu(self):
        return self.p_usx.shape[0]

    @classmethod
    def from_factors(cls, p_s, p_u_given_s, p_x_given_us):
        """Build from p(s), p(u|s) (shape (s, u)) and p(x|u,s) (shape (u, s, x))."""
        p_s = np.asarray(p_s, dtype=np.float64)
        pus = np.asarray(p_u_given_s, dtype=np.float64).T * p_s[None, :]
        return cls(pus[:, :, None] * np.asarray(p_x_given_us, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class AuxInputP2:
    """p(u, s, x, z) for a P2 point; the Z-marginal must follow the channel."""

    p_usxz: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p_usxz)
        if p.ndim != 4:
            raise SizeMismatch("p_usxz must have 4 axes (u, s, x, z)")
        _check_total(p, "p_usxz")
        object.__setattr__(self, "p_usxz", p)

    @property
    def nu(self):
        return self.p_usxz.shape[0]

    @classmethod
    def from_factors(cls, channel, p_sx, p_u_given_sxz):
        """Build from p(s, x) and p(u | s, x, z) (shape (s, x, z, u))."""
        p_sx = np.asarray(p_sx, dtype=np.float64)
        gz = channel.gamma_z.transpose(1, 0, 2)  # (s, x, z)
        psxz = p_sx[:, :, None] * gz
        pu = np.asarray(p_u_given_sxz, dtype=np.float64)
        return cls(np.moveaxis(psxz[..., None] * pu, 3, 0))


@dataclass(frozen=True, eq=False)
class AuxInputV:
    """p(u, v, s) p(x | v) for a Q1/Q2 point."""

    p_uvs: np.ndarray
    p_x_given_v: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p_uvs)
        k = _frozen(self.p_x_given_v)
        if p.ndim != 3 or k.ndim != 2:
            raise SizeMismatch("p_uvs needs axes (u, v, s) and p_x_given_v axes (v, x)")
        if p.shape[1] != k.shape[0]:
            raise SizeMismatch("|V| differs between p_uvs and p_x_given_v")
        _check_total(p, "p_uvs")
        _check_probabilities(k, "p_x_given_v")
        dev = k.sum(axis=1) - 1.0
        worst = int(np.argmax(np.abs(dev)))
        if abs(dev[worst]) > SUM_TOL:
            raise RowSumMismatch((worst,), float(dev[worst]))
        object.__setattr__(self, "p_uvs", p)
        object.__setattr__(self, "p_x_given_v", k)

    @property
    def nu(self):
        return self.p_uvs.shape[0]

    @property
    def nv(self):
        return self.p_uvs.shape[1]

    @property
    def p_uvsx(self):
        return self.p_uvs[..., None] * self.p_x_given_v[None, :, None, :]


@dataclass(frozen=True, eq=False)
class JointDist:
    """A joint pmf over named axes, e.g. ("U", "S", "X", "Y", "Z")."""

    axes: tuple
    p: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(self.p))
        if len(self.axes) != self.p.ndim:
            raise SizeMismatch("axis names do not match the tensor rank")
        dev = float(self.p.sum()) - 1.0
        if abs(dev) > JOINT_TOL:
            raise RowSumMismatch((), dev)

    @property
    def sizes(self):
        return dict(zip(self.axes, self.p.shape))

    def marginal(self, names) -> np.ndarray:
        """Marginal over ``names``, axes kept in canonical (self.axes) order."""
        keep = frozenset(names)
        unknown = keep.difference(self.axes)
        if unknown:
            raise ValidationError(f"joint has no variable(s) {sorted(unknown)}")
        hit = self._cache.get(keep)
        if hit is None:
            drop = tuple(i for i, a in enumerate(self.axes) if a not in keep)
            hit = self.p.sum(axis=drop) if drop else self.p
            self._cache[keep] = hit
        return hit

    def order(self, names):
        return tuple(a for a in self.axes if a in set(names))


def make_joint(channel: RelayChannel, aux) -> JointDist:
    """Attach the channel to an auxiliary input.

    P1: p(u,s,x,y,z) = p(u,s,x) Gamma(y,z|x,s).
    P2: p(u,s,x,y,z) = p(u,s,x,z) Gamma(y,z|x,s) / Gamma_Z(z|x,s).
    Q:  p(u,v,s,x,y,z) = p(u,v,s) p(x|v) Gamma(y,z|x,s).
    """
    g = channel.gamma.transpose(1, 0, 2, 3)  # (s, x, y, z)
    if isinstance(aux, AuxInput):
        nu, ns, nx = aux.p_usx.shape
        _match(channel, ns, nx)
        _guard_size(nu * ns * nx * channel.ny * channel.nz)
        p = aux.p_usx[:, :, :, None, None] * g[None]
        return JointDist(("U", "S", "X", "Y", "Z"), p)
    if isinstance(aux, AuxInputP2):
        nu, ns, nx, nz = aux.p_usxz.shape
        _match(channel, ns, nx)
        if nz != channel.nz:
            raise SizeMismatch(f"|Z| = {nz} does not match channel |Z| = {channel.nz}")
        _guard_size(nu * ns * nx * channel.ny * nz)
        gz = g.sum(axis=2)  # (s, x, z)
        psxz = aux.p_usxz.sum(axis=0)
        psx = psxz.sum(axis=2)
        if np.max(np.abs(psxz - psx[:, :, None] * gz)) > 1e-10:
            raise ValidationError("P2 input's Z-marginal disagrees with the channel")
        with np.errstate(divide="ignore", invalid="ignore"):
            y_given = np.where(gz[:, :, None, :] > 0, g / gz[:, :, None, :], 0.0)
        p = aux.p_usxz[:, :, :, None, :] * y_given[None]
        return JointDist(("U", "S", "X", "Y", "Z"), p)
    if isinstance(aux, AuxInputV):
        nu, nv, ns = aux.p_uvs.shape
        nx = aux.p_x_given_v.shape[1]
        _match(channel, ns, nx)
        _guard_size(nu * nv * ns * nx * channel.ny * channel.nz)
        p = aux.p_uvsx[..., None, None] * g[None, None]
        return JointDist(("U", "V", "S", "X", "Y", "Z"), p)
    raise TypeError(f"unsupported input type {type(aux).__name__}")


def _match(channel, ns, nx):
    if (nx, ns) != (channel.nx, channel.ns):
        raise SizeMismatch(
            f"input alphabets |S|={ns}, |X|={nx} do not match channel "
            f"|S|={channel.ns}, |X|={channel.nx}"
        )


def _guard_size(n):
    if n > MAX_JOINT_ENTRIES:
        raise SizeMismatch(f"joint would have {n} entries (limit {MAX_JOINT_ENTRIES})")


def check_cardinality(channel: RelayChannel, aux, mode: str):
    """Raise ``CardinalityExceeded`` if ``aux`` breaks the caps of ``mode``."""
    caps = {
        "P1": (channel.p1_cap(), None),
        "P2": (channel.p2_cap(), None),
        "Q1": channel.q1_caps(),
        "Q2": channel.q2_caps(),
    }[mode]
    if aux.nu > caps[0]:
        raise CardinalityExceeded(f"|U| = {aux.nu} exceeds the {mode} cap {caps[0]}")
    if caps[1] is not None and aux.nv > caps[1]:
        raise CardinalityExceeded(f"|V| = {aux.nv} exceeds the {mode} cap {caps[1]}")


@dataclass(frozen=True)
class ClassificationReport:
    reversely_degraded: bool
    degraded: bool
    semi_deterministic: bool
    class_nl: bool
    residuals: dict
    tol: float

    def as_dict(self):
        return {
            "reversely_degraded": self.reversely_degraded,
            "degraded": self.degraded,
            "semi_deterministic": self.semi_deterministic,
            "class_nl": self.class_nl,
            "residuals": dict(self.residuals),
            "tol": self.tol,
        }


def _ratio_spread(num, den):
    """max over (s, other, out) of the spread over x of num/den where den > 0.

    ``num`` has shape (x, s, a, b) and ``den`` shape (x, s, b); the ratio
    num/den is a conditional of ``a`` given ``b`` which must not depend on x.
    """
    mask = den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den[:, :, None, :]
    hi = np.where(mask[:, :, None, :], r, -np.inf).max(axis=0)
    lo = np.where(mask[:, :, None, :], r, np.inf).min(axis=0)
    valid = np.isfinite(hi) & np.isfinite(lo)
    return float(np.max(hi - lo, where=valid, initial=0.0))


def classify(channel: RelayChannel, tol: float = CLASSIFY_TOL) -> ClassificationReport:
    """Decide the degradedness classes of a relay channel.

    Each flag is ``residual <= tol`` where the residual measures how far the
    defining conditional-independence is from holding exactly.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    g = channel.gamma
    gy, gz = channel.gamma_y, channel.gamma_z
    # degraded: Gamma(y | z, x, s) free of x.
    degraded = _ratio_spread(g, gz)
    # reversely degraded: Gamma(z | y, x, s) free of x.
    reverse = _ratio_spread(g.transpose(0, 1, 3, 2), gy)
    semi = float(np.max(1.0 - gz.max(axis=2)))
    nl = float(np.max(gz.max(axis=1) - gz.min(axis=1)))
    residuals = {
        "reversely_degraded": reverse,
        "degraded": degraded,
        "semi_deterministic": semi,
        "class_nl": nl,
    }
    return ClassificationReport(
        reversely_degraded=reverse <= tol,
        degraded=degraded <= tol,
        semi_deterministic=semi <= max(tol, 1.0 - POINT_MASS),
        class_nl=nl <= tol,
        residuals=residuals,
        tol=tol,
    )
