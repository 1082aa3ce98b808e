"""Derivative-free search over auxiliary distributions.

Candidates are built from row-stochastic blocks (p(s) on a simplex grid, the
conditionals drawn Dirichlet(1) per restart) and polished by moving mass
between two coordinates of one row, halving the step from 0.1 ten times.

A returned witness is a sound certificate for the distribution it carries.
Failing to find one proves nothing: the search is not a global optimiser.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .channel import AuxInput, AuxInputP2, AuxInputV, RelayChannel, classify, make_joint
from .errors import BudgetExceeded, NotClassNL, ValidationError
from .info import cond_mutual_information as I
from .info import entropy, positive_part
from .parallel import pmap
from .regions import (
    INNER,
    OUTER,
    BoundId,
    RateTriple,
    Section,
    SLACK_TOL,
    bound_constraints,
    evaluate,
    r0_cap,
    r1_cap,
    re_cap,
)

OUTER_NOTE = (
    "outer membership needs a maximisation over all auxiliaries; a missing "
    "witness only means the point lies outside the searched approximation"
)


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 32
    grid: int = 4
    refine_steps: int = 10
    seed: int = 0
    time_budget: float | None = None
    u_cap: int = 4
    v_cap: int = 4
    full_caps: bool = False
    refine_top: int = 2
    first_step: float = 0.1

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.grid < 2:
            raise ValidationError("grid resolution must be >= 2")
        if self.refine_steps < 0 or self.refine_top < 0:
            raise ValidationError("refine_steps and refine_top must be >= 0")
        if self.u_cap < 1 or self.v_cap < 1:
            raise ValidationError("u_cap and v_cap must be >= 1")


@dataclass(frozen=True)
class Witness:
    aux: object
    triple: RateTriple
    slacks: dict

    @property
    def min_slack(self):
        return min(self.slacks.values())


@dataclass(frozen=True)
class SearchResult:
    bound: BoundId
    found: bool
    witness: Witness | None
    best_slack: float
    best_slacks: dict
    best_aux: object
    evaluated: int
    note: str = ""


@dataclass(frozen=True)
class TracePoint:
    R0: float
    R1: float
    Re: float
    slack_min: float


@dataclass(frozen=True)
class SecrecyBounds:
    lower: float
    upper: float
    lower_aux: object = field(repr=False, default=None)
    upper_aux: object = field(repr=False, default=None)


# ----------------------------------------------------------------------------
# parameter families


def simplex_grid(k: int, m: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in {0, 1/m, ..., 1}."""
    pts = [
        np.diff(np.concatenate(([0], cuts, [m]))) / m
        for cuts in itertools.combinations_with_replacement(range(m + 1), k - 1)
    ]
    return np.array(pts, dtype=np.float64)


def _normalise(rows):
    return rows / rows.sum(axis=1, keepdims=True)


class Family:
    """A list of row-stochastic blocks mapped to an auxiliary input."""

    shapes: list

    def build(self, blocks):
        raise NotImplementedError

    def sample(self, rng, restart, grid):
        first = simplex_grid(self.shapes[0][1], grid)
        blocks = [first[restart % len(first)][None, :].copy()]
        for rows, cols in self.shapes[1:]:
            if restart == 0:
                blocks.append(np.full((rows, cols), 1.0 / cols))
            else:
                blocks.append(_normalise(rng.dirichlet(np.ones(cols), size=rows)))
        return blocks


class P1Family(Family):
    def __init__(self, channel, nu):
        self.ns, self.nx, self.nu = channel.ns, channel.nx, nu
        self.shapes = [(1, self.ns), (self.ns, nu), (nu * self.ns, self.nx)]

    def build(self, blocks):
        ps, pu, px = blocks
        return AuxInput.from_factors(ps[0], pu, px.reshape(self.nu, self.ns, self.nx))


class P2Family(Family):
    def __init__(self, channel, nu):
        self.channel = channel
        self.ns, self.nx, self.nz, self.nu = channel.ns, channel.nx, channel.nz, nu
        self.shapes = [(1, self.ns * self.nx), (self.ns * self.nx * self.nz, nu)]

    def build(self, blocks):
        psx, pu = blocks
        return AuxInputP2.from_factors(
            self.channel,
            psx.reshape(self.ns, self.nx),
            pu.reshape(self.ns, self.nx, self.nz, self.nu),
        )


class QFamily(Family):
    def __init__(self, channel, nu, nv):
        self.ns, self.nx, self.nu, self.nv = channel.ns, channel.nx, nu, nv
        self.shapes = [(1, self.ns), (self.ns, nu), (nu * self.ns, nv), (nv, self.nx)]

    def build(self, blocks):
        ps, pu, pv, px = blocks
        pus = pu.T * ps[0][None, :]  # (u, s)
        pv_us = pv.reshape(self.nu, self.ns, self.nv).transpose(0, 2, 1)  # (u, v, s)
        return AuxInputV(pus[:, None, :] * pv_us, px)

    def sample(self, rng, restart, grid):
        blocks = super().sample(rng, restart, grid)
        if restart == 0:
            # start from a deterministic map x = v mod |X|, so that every
            # deterministic-encoder point is reachable by refinement
            px = np.zeros((self.nv, self.nx))
            px[np.arange(self.nv), np.arange(self.nv) % self.nx] = 1.0
            blocks[-1] = px
        return blocks


def family_for(input_class, channel: RelayChannel, cfg: SearchConfig) -> Family:
    if input_class == "P1":
        cap_u = channel.p1_cap()
    elif input_class == "P2":
        cap_u = channel.p2_cap()
    else:
        cap_u, cap_v = channel.q1_caps() if input_class == "Q1" else channel.q2_caps()
    if cfg.full_caps:
        warnings.warn(
            f"searching {input_class} at full cardinality caps; expect long run times",
            stacklevel=3,
        )
        nu = cap_u
    else:
        nu = min(cap_u, cfg.u_cap)
    if input_class == "P1":
        return P1Family(channel, nu)
    if input_class == "P2":
        return P2Family(channel, nu)
    nv = cap_v if cfg.full_caps else min(cap_v, cfg.v_cap)
    return QFamily(channel, nu, nv)


# ----------------------------------------------------------------------------
# generic maximiser


class _Clock:
    def __init__(self, budget):
        self.deadline = None if budget is None else time.monotonic() + budget

    def expired(self):
        return self.deadline is not None and time.monotonic() > self.deadline


@dataclass
class _Cand:
    index: int
    blocks: list
    value: float
    extra: object = None


def _restart_blocks(family, cfg):
    def make(r):
        rng = np.random.default_rng([cfg.seed, r])
        return family.sample(rng, r, cfg.grid)

    return [make(r) for r in range(cfg.restarts)]


def refine(family, blocks, score, steps=10, first_step=0.1, stop_at=math.inf, clock=None):
    """Pairwise mass moves within each row, keeping strict improvements.

    ``score(blocks) -> float`` is maximised. Returns ``(blocks, value)``.
    """
    blocks = [b.copy() for b in blocks]
    best = score(blocks)
    delta = first_step
    for _ in range(steps):
        for bi, b in enumerate(blocks):
            rows, cols = b.shape
            for r in range(rows):
                for i, j in itertools.permutations(range(cols), 2):
                    if best >= stop_at or (clock is not None and clock.expired()):
                        return blocks, best
                    move = min(delta, b[r, i])
                    if move <= 0:
                        continue
                    trial = [x if k != bi else x.copy() for k, x in enumerate(blocks)]
                    trial[bi][r, i] -= move
                    trial[bi][r, j] += move
                    trial[bi][r] /= trial[bi][r].sum()
                    val = score(trial)
                    if val > best:
                        blocks, best = trial, val
                        b = blocks[bi]
        delta /= 2
    return blocks, best


def maximise(family, score, cfg: SearchConfig, stop_at=math.inf, seeds=()):
    """Seeded restarts plus refinement of the best few.

    Returns the list of evaluated candidates (restarts first, then refined
    points) and the best one. Ties keep the lowest index.
    """
    clock = _Clock(cfg.time_budget)
    starts = [list(s) for s in seeds] + _restart_blocks(family, cfg)
    values = pmap(score, starts)
    pool = [_Cand(i, b, v) for i, (b, v) in enumerate(zip(starts, values))]

    def best_of(cands):
        return min(cands, key=lambda c: (-c.value, c.index))

    if best_of(pool).value >= stop_at:
        return pool, best_of(pool)
    ranked = sorted(pool, key=lambda c: (-c.value, c.index))[: cfg.refine_top]
    for c in ranked:
        if clock.expired():
            raise BudgetExceeded("search time budget exhausted", best=best_of(pool))
        blocks, val = refine(
            family, c.blocks, score, cfg.refine_steps, cfg.first_step, stop_at, clock
        )
        pool.append(_Cand(len(pool), blocks, val))
        if val >= stop_at:
            break
    if clock.expired() and best_of(pool).value < stop_at:
        raise BudgetExceeded("search time budget exhausted", best=best_of(pool))
    return pool, best_of(pool)


# ----------------------------------------------------------------------------
# membership searches


def _require_nl(bound, channel):
    if bound is BoundId.D_OUT_HAT and not classify(channel).class_nl:
        raise NotClassNL("d-out-hat is only defined for class-NL channels")


def _membership(bound, channel, t, cfg, section):
    _require_nl(bound, channel)
    family = family_for(bound.input_class, channel, cfg)

    def slack_of(blocks):
        joint = make_joint(channel, family.build(blocks))
        return evaluate(bound_constraints(bound, joint), t, section)

    def score(blocks):
        return slack_of(blocks).min_slack

    try:
        pool, best = maximise(family, score, cfg, stop_at=-SLACK_TOL)
    except BudgetExceeded as exc:
        best = exc.best
        res = slack_of(best.blocks)
        exc.best = SearchResult(
            bound, False, None, res.min_slack, res.slacks, family.build(best.blocks), -1,
            note=OUTER_NOTE if bound in OUTER else "",
        )
        raise
    res = slack_of(best.blocks)
    aux = family.build(best.blocks)
    witness = Witness(aux, t, res.slacks) if res.ok else None
    return SearchResult(
        bound,
        res.ok,
        witness,
        res.min_slack,
        res.slacks,
        aux,
        len(pool),
        note=OUTER_NOTE if bound in OUTER else "",
    )


def inner_membership(
    bound: BoundId, channel: RelayChannel, t: RateTriple, cfg: SearchConfig,
    section: Section = Section.FULL,
) -> SearchResult:
    """Look for an auxiliary distribution certifying ``t`` in an inner bound."""
    if bound not in INNER:
        raise ValidationError(f"{bound.value} is not an inner bound")
    return _membership(bound, channel, t, cfg, section)


def outer_violation(
    bound: BoundId, channel: RelayChannel, t: RateTriple, cfg: SearchConfig,
    section: Section = Section.FULL,
) -> SearchResult:
    """Search the outer bound's distribution class for a point admitting ``t``.

    ``found`` false means no witness in the searched approximation of the
    outer set, which is an exclusion only up to search quality.
    """
    if bound not in OUTER:
        raise ValidationError(f"{bound.value} is not an outer bound")
    return _membership(bound, channel, t, cfg, section)


# ----------------------------------------------------------------------------
# boundary traces


def candidate_pool(bound: BoundId, channel: RelayChannel, cfg: SearchConfig):
    """Auxiliary inputs used to trace ``bound``.

    Restart points plus refinements aimed at the largest R0, the largest R1 at
    R0 = 0 and the largest Re at that R1. Bounds sharing an input class and
    config share the pool, which lets traces be compared at equal witnesses.
    """
    _require_nl(bound, channel)
    family = family_for(bound.input_class, channel, cfg)

    def cons(blocks):
        return bound_constraints(bound, make_joint(channel, family.build(blocks)))

    objectives = [
        lambda b: r0_cap(cons(b)),
        lambda b: r1_cap(cons(b), 0.0),
        lambda b: _re_top(cons(b)),
    ]
    out, seen = [], set()
    clock = _Clock(cfg.time_budget)
    starts = _restart_blocks(family, cfg)
    for blocks in starts:
        out.append(family.build(blocks))
    for obj in objectives:
        values = pmap(obj, starts)
        order = sorted(range(len(starts)), key=lambda i: (-values[i], i))
        for i in order[: cfg.refine_top]:
            if clock.expired():
                raise BudgetExceeded("trace time budget exhausted", best=out)
            key = (id(obj), i)
            if key in seen:
                continue
            seen.add(key)
            blocks, _ = refine(family, starts[i], obj, cfg.refine_steps, cfg.first_step, clock=clock)
            out.append(family.build(blocks))
    return out


def _re_top(cons):
    r1 = r1_cap(cons, 0.0)
    return re_cap(cons, 0.0, r1) if math.isfinite(r1) else -math.inf


def boundary_trace(
    bound: BoundId, channel: RelayChannel, cfg: SearchConfig, r0_grid: int, candidates=None
) -> list[TracePoint]:
    """(R0, max R1, max Re at that (R0, R1)) on an R0 grid over [0, max R0]."""
    if r0_grid < 2:
        raise ValidationError("r0_grid must be >= 2")
    _require_nl(bound, channel)
    if candidates is None:
        candidates = candidate_pool(bound, channel, cfg)
    cons = pmap(lambda a: bound_constraints(bound, make_joint(channel, a)), candidates)
    r0_max = max(r0_cap(c) for c in cons)
    points = []
    for r0 in np.linspace(0.0, r0_max, r0_grid):
        r0 = float(r0)
        caps = [r1_cap(c, r0) for c in cons]
        r1 = max(caps)
        if not math.isfinite(r1) or r1 < 0:
            # numerically at the edge of R0: fall back to the largest feasible
            r1 = 0.0
        best_re, best_slack = -math.inf, -math.inf
        for c, cap in zip(cons, caps):
            if cap < r1 - 1e-12:
                continue
            re = max(0.0, re_cap(c, r0, r1))
            slack = evaluate(c, RateTriple(r0, r1, re)).min_slack
            if re > best_re:
                best_re, best_slack = re, slack
        if best_re == -math.inf:
            best_re, best_slack = 0.0, 0.0
        points.append(TracePoint(r0, r1, best_re, best_slack))
    return points


# ----------------------------------------------------------------------------
# secrecy capacity


def secrecy_capacity_bounds(channel: RelayChannel, mode: str, cfg: SearchConfig) -> SecrecyBounds:
    """Searched lower and upper bounds on the secrecy capacity.

    ``mode="det"``: lower = max over P1 of [I(X;Y|US) - I(X;Z|US)]^+.
    ``mode="sto"``: lower = max over Q1 of [I(V;Y|US) - I(V;Z|US)]^+.
    The upper bound max_{(X,S)} I(X;Y|ZS) is seeded with the per-u
    conditionals p(s, x | u) of the best lower-bound input, so that the
    search never reports lower > upper.
    """
    mode = {"deterministic": "det", "stochastic": "sto"}.get(mode, mode)
    if mode not in ("det", "sto"):
        raise ValidationError(f"mode must be det or sto, got {mode!r}")
    family = family_for("P1" if mode == "det" else "Q1", channel, cfg)
    var = "X" if mode == "det" else "V"

    def lower_score(blocks):
        joint = make_joint(channel, family.build(blocks))
        return positive_part(I(joint, var, "Y", "US") - I(joint, var, "Z", "US"))

    _, best = maximise(family, lower_score, cfg)
    lower_aux = family.build(best.blocks)
    joint = make_joint(channel, lower_aux)

    sx = P1Family(channel, 1)
    p_usx = joint.marginal("USX")
    seeds = []
    for u in range(p_usx.shape[0]):
        mass = p_usx[u].sum()
        if mass > 0:
            cond = (p_usx[u] / mass).reshape(-1)
            ps = cond.reshape(channel.ns, channel.nx).sum(axis=1)
            with np.errstate(invalid="ignore", divide="ignore"):
                px = np.where(ps[:, None] > 0, cond.reshape(channel.ns, channel.nx) / ps[:, None], 1.0 / channel.nx)
            seeds.append([ps[None, :], np.ones((channel.ns, 1)), px])

    def upper_score(blocks):
        j = make_joint(channel, sx.build(blocks))
        return I(j, "X", "Y", "ZS")

    _, top = maximise(sx, upper_score, cfg, seeds=seeds)
    return SecrecyBounds(best.value, top.value, lower_aux, sx.build(top.blocks))


def vanishing_zeta_diagnostic(channel: RelayChannel, cfg: SearchConfig) -> float:
    """Searched max over (X, S) of min{H(S|Z), I(XS;Y|Z)}.

    A value at 0 means the condition under which the zeta correction
    vanishes for every input holds (up to search quality).
    """
    sx = P1Family(channel, 1)

    def score(blocks):
        j = make_joint(channel, sx.build(blocks))
        return min(entropy(j, "S", "Z"), I(j, "XS", "Y", "Z"))

    _, top = maximise(sx, score, cfg)
    return top.value
