"""Named invariant suites, one per acceptance criterion.

Each suite returns a ``SuiteResult``; the CLI ``check`` command and the
acceptance tests both run them. Quantities are compared against oracles that
do not share code with the library paths under test (a from-scratch loop
summation for mutual information, hand-built factorised channels, closed
forms).
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import AuxInput, RelayChannel, make_joint, validate_channel
from .gaussian import (
    GaussianRegion,
    GaussianSpec,
    gaussian_corners,
    gaussian_secrecy_capacity,
    rate_slacks,
)
from .info import cond_mutual_information, delta_gap, entropy, zeta
from .io import channel_to_obj, dumps, input_to_obj, write_text
from .regions import BoundId, RateTriple, SLACK_TOL, constraint_check
from .search import SearchConfig, boundary_trace, candidate_pool
from .simulator import LOG2E, SimConfig, simulate


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        parts = ", ".join(f"{k}={_short(v)}" for k, v in self.detail.items())
        return f"[{status}] {self.name} ({self.seconds:.1f}s) {parts}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


# ----------------------------------------------------------------------------
# random objects


def random_stochastic(rng, rows_shape, k):
    p = rng.dirichlet(np.ones(k), size=rows_shape)
    return p / p.sum(axis=-1, keepdims=True)


def random_channel(rng, nx, ns, ny, nz) -> RelayChannel:
    g = random_stochastic(rng, (nx, ns), ny * nz).reshape(nx, ns, ny, nz)
    return validate_channel(g)


def reversely_degraded_channel(rng, nx, ns, ny, nz) -> RelayChannel:
    """Gamma(y,z|x,s) = W(y|x,s) V(z|y,s): Z is a degraded copy of (Y, S)."""
    w = random_stochastic(rng, (nx, ns), ny)
    v = random_stochastic(rng, (ns, ny), nz)
    g = w[:, :, :, None] * v[None, :, :, :]
    return validate_channel(g / g.sum(axis=(2, 3), keepdims=True))


def degraded_channel(rng, nx, ns, ny, nz) -> RelayChannel:
    """Gamma(y,z|x,s) = W(z|x,s) V(y|z,s): Y is a degraded copy of (Z, S)."""
    w = random_stochastic(rng, (nx, ns), nz)
    v = random_stochastic(rng, (ns, nz), ny)
    g = w[:, :, None, :] * v.transpose(0, 2, 1)[None, :, :, :]
    return validate_channel(g / g.sum(axis=(2, 3), keepdims=True))


def random_p1(rng, nu, ns, nx) -> AuxInput:
    p = rng.dirichlet(np.ones(nu * ns * nx)).reshape(nu, ns, nx)
    return AuxInput(p / p.sum())


def random_sizes(rng, lo=1, hi=3, n=4):
    return tuple(int(v) for v in rng.integers(lo, hi + 1, size=n))


# ----------------------------------------------------------------------------
# oracles


def brute_force_cmi(p, axes, a, b, c=""):
    """I(A;B|C) by an explicit loop over every cell of the joint."""
    a, b, c = set(a), set(b), set(c)
    idx = {v: i for i, v in enumerate(axes)}
    marg = {}

    def key(cell, names):
        return tuple(cell[idx[v]] for v in sorted(names))

    for cell in itertools.product(*(range(k) for k in p.shape)):
        pr = p[cell]
        for names in ("abc", "ac", "bc", "c"):
            sel = set().union(*(dict(a=a, b=b, c=c)[ch] for ch in names))
            k = (names, key(cell, sel))
            marg[k] = marg.get(k, 0.0) + pr
    total = 0.0
    for cell in itertools.product(*(range(k) for k in p.shape)):
        pr = p[cell]
        if pr <= 0:
            continue
        pabc = marg[("abc", key(cell, a | b | c))]
        pac = marg[("ac", key(cell, a | c))]
        pbc = marg[("bc", key(cell, b | c))]
        pc = marg[("c", key(cell, c))]
        total += pr * math.log2(pabc * pc / (pac * pbc))
    return total


# ----------------------------------------------------------------------------
# suites


def mi_oracle(seed=101, joints=200):
    rng = np.random.default_rng(seed)
    worst = 0.0
    count = 0
    for _ in range(joints):
        ch = random_channel(rng, *random_sizes(rng, 1, 3))
        aux = random_p1(rng, int(rng.integers(1, 4)), ch.ns, ch.nx)
        joint = make_joint(ch, aux)
        letters = list(joint.axes)
        for _ in range(3):
            perm = rng.permutation(letters)
            cut = sorted(rng.choice(np.arange(1, 5), size=2, replace=False))
            a = "".join(perm[: cut[0]])
            b = "".join(perm[cut[0] : cut[1]])
            c = "".join(perm[cut[1] : cut[1] + int(rng.integers(0, 6 - cut[1]))])
            got = cond_mutual_information(joint, a, b, c)
            ref = brute_force_cmi(np.asarray(joint.p), joint.axes, a, b, c)
            worst = max(worst, abs(got - ref))
            count += 1
    return {"comparisons": count, "max_abs_err": worst}, worst <= 1e-12


def _tilde_violations(rng, channels=100, inputs=20, triples=50):
    violations = inner_ok = 0
    for _ in range(channels):
        ch = random_channel(rng, *random_sizes(rng, 2, 3))
        for _ in range(inputs):
            joint = make_joint(ch, random_p1(rng, int(rng.integers(1, 4)), ch.ns, ch.nx))
            i_xy = cond_mutual_information(joint, "X", "Y", "US")
            i_xz = cond_mutual_information(joint, "X", "Z", "US")
            r0 = min(cond_mutual_information(joint, "US", "Y"),
                     cond_mutual_information(joint, "U", "Z", "S"))
            for _ in range(triples):
                R0 = rng.uniform(0, 1.2 * r0 + 0.02)
                R1 = rng.uniform(0, 1.2 * i_xy + 0.02)
                Re = rng.uniform(0, 1.2 * max(R1 - i_xz, 0) + 0.02)
                t = RateTriple(R0, R1, Re)
                inner = constraint_check(BoundId.D_IN_TILDE, joint, t).ok
                outer = constraint_check(BoundId.D_OUT_TILDE, joint, t).ok
                inner_ok += inner
                violations += inner and not outer
    return violations, inner_ok


def inclusion(seed=202):
    rng = np.random.default_rng(seed)
    v, ok = _tilde_violations(rng)
    return {"violations": v, "inner_members": ok, "triples": 100 * 20 * 50}, v == 0 and ok > 0


TRACE_CFG = SearchConfig(restarts=6, grid=3, refine_steps=6, refine_top=1, seed=7)


def rd_collapse(seed=303, channels=50):
    rng = np.random.default_rng(seed)
    max_delta = max_gap = 0.0
    for _ in range(channels):
        ch = reversely_degraded_channel(rng, *random_sizes(rng, 2, 3))
        for _ in range(20):
            joint = make_joint(ch, random_p1(rng, int(rng.integers(1, 4)), ch.ns, ch.nx))
            max_delta = max(max_delta, delta_gap(joint))
        pool = candidate_pool(BoundId.D_IN_TILDE, ch, TRACE_CFG)
        a = boundary_trace(BoundId.D_IN_TILDE, ch, TRACE_CFG, 6, pool)
        b = boundary_trace(BoundId.D_OUT_TILDE, ch, TRACE_CFG, 6, pool)
        for p, q in zip(a, b):
            max_gap = max(max_gap, abs(p.R0 - q.R0), abs(p.R1 - q.R1), abs(p.Re - q.Re))
    return (
        {"max_delta": max_delta, "max_trace_gap": max_gap},
        max_delta <= 1e-10 and max_gap <= 1e-6,
    )


def degraded_secrecy(seed=404, channels=50):
    rng = np.random.default_rng(seed)
    max_cmi = max_re = 0.0
    for _ in range(channels):
        ch = degraded_channel(rng, *random_sizes(rng, 2, 3))
        for _ in range(20):
            joint = make_joint(ch, random_p1(rng, int(rng.integers(1, 4)), ch.ns, ch.nx))
            max_cmi = max(max_cmi, cond_mutual_information(joint, "X", "Y", "ZUS"))
        trace = boundary_trace(BoundId.S_OUT_TILDE, ch, TRACE_CFG, 4)
        max_re = max(max_re, max(p.Re for p in trace))
    return {"max_I(X;Y|ZUS)": max_cmi, "max_Re": max_re}, max_cmi <= 1e-10 and max_re <= 1e-6


def zeta_bound(seed=505, joints=500):
    rng = np.random.default_rng(seed)
    worst = -math.inf
    single_s_nonzero = 0
    for k in range(joints):
        sizes = list(random_sizes(rng, 1, 3))
        if k % 5 == 0:
            sizes[1] = 1
        ch = random_channel(rng, *sizes)
        joint = make_joint(ch, random_p1(rng, int(rng.integers(1, 4)), ch.ns, ch.nx))
        z = zeta(joint)
        bound = min(entropy(joint, "S", "Z"), cond_mutual_information(joint, "XS", "Y", "Z"))
        worst = max(worst, z - bound)
        if ch.ns == 1 and z != 0.0:
            single_s_nonzero += 1
    return (
        {"max_excess": worst, "nonzero_with_one_relay_symbol": single_s_nonzero},
        worst <= 1e-10 and single_s_nonzero == 0,
    )


def gaussian_forms(seed=606, specs=1000, resolution=101):
    rd = GaussianSpec(1.0, 1.0, 1.0, 2.0, math.sqrt(0.5))
    ref = 0.5 - 0.5 * math.log2(1.5)
    cs = gaussian_secrecy_capacity(rd)
    closed = abs(cs.lower - ref) <= 1e-12 and abs(cs.upper - ref) <= 1e-12
    p2_values = [gaussian_secrecy_capacity(GaussianSpec(1.0, p2, 1.0, 2.0, math.sqrt(0.5))) for p2 in (0.1, 1.0, 10.0)]
    p2_invariant = all(c == cs for c in p2_values)
    rng = np.random.default_rng(seed)
    thetas = np.linspace(0, 1, resolution)
    violations = 0
    worst = math.inf
    for _ in range(specs):
        spec = GaussianSpec(
            float(rng.uniform(0, 10)), float(rng.uniform(0, 10)),
            float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 5)), float(rng.uniform(-0.99, 0.99)),
        )
        rows = np.array(gaussian_corners(GaussianRegion.GD_IN, spec, thetas), dtype=float)
        th, eta, R0, R1, Re = rows.T
        sl = rate_slacks(GaussianRegion.GD_OUT, spec, th, eta, R0, R1, Re)
        m = np.min(np.stack(list(sl.values())), axis=0)
        worst = min(worst, float(m.min()))
        violations += int(np.sum(m < -SLACK_TOL))
    return (
        {"lower": cs.lower, "upper": cs.upper, "ref": ref, "p2_invariant": p2_invariant,
         "gd_in_corner_violations": violations, "min_slack": worst},
        closed and p2_invariant and violations == 0,
    )


# ---- simulator


def flip_fixture(p=0.25):
    """Y = X noiseless, Z = X through a flip(p), two-symbol mute relay."""
    g = np.zeros((2, 2, 2, 2))
    for x, s, z in itertools.product(range(2), repeat=3):
        g[x, s, x, z] = 1 - p if z == x else p
    ch = validate_channel(g)
    aux = AuxInput(np.full((1, 2, 2), 0.25))
    return ch, aux


SIM_NS = (8, 12, 16)
SIM_B = 4


def _nonincreasing(values, slack=0.01):
    """Nonincreasing with at most one inversion of size <= slack."""
    ups = [b - a for a, b in zip(values, values[1:]) if b > a]
    return not ups or (len(ups) == 1 and ups[0] <= slack)


def simulator_soundness(seed=707, trials=400, eps=0.05):
    ch, aux = flip_fixture()
    reports = {}
    for n in SIM_NS:
        cfg = SimConfig.preset(ch, aux, n, SIM_B, eps=eps, trials=trials, seed=seed)
        reports[n] = (cfg, simulate(cfg))
    series = {}
    for key in ("e2", "e1a", "e1b", "e1c", "eB_zxs", "eB_zus"):
        series[key] = [float(np.mean(getattr(reports[n][1], key))) for n in SIM_NS]
    trends = {k: _nonincreasing(v) for k, v in series.items()}
    _, rep16 = reports[16]
    target = rep16.equiv_target
    lower = rep16.equiv_block_mean
    detail = {f"{k}@8/12/16": v for k, v in series.items()}
    detail.update(
        trends_ok=all(trends.values()),
        failing_trends=[k for k, ok in trends.items() if not ok],
        lambda1=rep16.lambda1,
        lambda2=rep16.lambda2,
        equiv_block_mean=lower,
        equiv_lower=rep16.equiv_lower,
        equiv_ceiling=target - (3 + LOG2E) / 16,
        equiv_target=target,
        gap=target - lower,
    )
    passed = (
        all(trends.values())
        and rep16.lambda1 <= 0.1
        and rep16.lambda2 <= 0.1
        and abs(target - lower) <= 0.25
    )
    return detail, passed


def threshold_falsification(seed=808, trials=400, eps=0.05):
    ch, aux = flip_fixture()
    joint = make_joint(ch, aux)
    rates = SimConfig.preset(ch, aux, 16, SIM_B, eps=eps).__dict__
    R0 = cond_mutual_information(joint, "U", "Z", "S") + 0.2
    cfg = SimConfig(ch, aux, 16, SIM_B, R0, rates["r"], rates["r1"], rates["r2"],
                    eps=eps, trials=trials, seed=seed)
    rep = simulate(cfg)
    e2 = float(np.mean(rep.e2))
    return {"R0": R0, "e2": e2}, e2 >= 0.5


# ---- determinism


def _run_cli(args, threads, cwd):
    env = dict(os.environ, RCC_THREADS=str(threads))
    return subprocess.run(
        [sys.executable, "-m", "rcc", *args], cwd=cwd, env=env, capture_output=True, check=False
    )


def determinism(seed=909):
    ch, aux = flip_fixture()
    results = {}
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_text(tmp / "ch.json", dumps(channel_to_obj(ch)))
        write_text(tmp / "in.json", dumps(input_to_obj(aux)))
        runs = []
        for threads, rep in ((1, 0), (1, 1), (4, 0), (4, 1)):
            sim_out = f"sim_{threads}_{rep}.json"
            reg_out = f"reg_{threads}_{rep}.csv"
            a = _run_cli(["simulate", "--channel", "ch.json", "--input", "in.json", "--n", "12",
                          "--blocks", "3", "--trials", "60", "--seed", str(seed),
                          "--preset-rates", "--out", sim_out], threads, tmp)
            b = _run_cli(["region", "--bound", "d-in-tilde", "--channel", "ch.json", "--seed",
                          str(seed), "--restarts", "6", "--grid", "3", "--r0-grid", "5",
                          "--out", reg_out], threads, tmp)
            if a.returncode or b.returncode:
                return {"error": (a.stderr + b.stderr).decode()[-300:]}, False
            runs.append((a.stdout, (tmp / sim_out).read_bytes(), b.stdout, (tmp / reg_out).read_bytes()))
        same = all(r == runs[0] for r in runs[1:])
        results["runs"] = len(runs)
        results["identical"] = same
    return results, same


SUITES = {
    "mi-oracle": mi_oracle,
    "inclusion": inclusion,
    "rd-collapse": rd_collapse,
    "degraded-secrecy": degraded_secrecy,
    "zeta-bound": zeta_bound,
    "gaussian": gaussian_forms,
    "simulator": simulator_soundness,
    "threshold": threshold_falsification,
    "determinism": determinism,
}


def run_suite(name) -> SuiteResult:
    try:
        fn = SUITES[name]
    except KeyError:
        from .errors import ValidationError

        raise ValidationError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    t0 = time.perf_counter()
    detail, passed = fn()
    return SuiteResult(name, bool(passed), detail, time.perf_counter() - t0)
