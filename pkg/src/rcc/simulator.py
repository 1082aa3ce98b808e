"""Monte Carlo run of the block-Markov relay scheme with threshold decoders.

Index sets (sizes 2^floor(n*rate)):
    W  relay bin index, rate r          s(w)
    T  common message, rate R0          u(w, t)
    J  randomisation, rate r2           x(w, t, j, l)
    L  secret message, rate r1

A trial draws a fresh random codebook and partition phi: T -> W, sends B
blocks (block 1 uses the constant t_0 = 0, block B carries no fresh
message) and records, for every message block k = 1..B-1, which decoder
failed. Decoders declare only when exactly one candidate clears the
threshold; zero or several passers count as failure.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .channel import AuxInput, RelayChannel, make_joint
from .errors import CapExceeded, ValidationError
from .info import cond_mutual_information as I
from .info import density_table, entropy
from .parallel import pmap

LOG2E = 1.4426950408889634
DEFAULT_CAP = 2**20
BLOCK_EVENTS = ("e2", "e1a", "e1b", "e1c", "e_tau", "eB_zxs", "eB_zus")


@dataclass(frozen=True)
class SimConfig:
    channel: RelayChannel = field(repr=False)
    aux: AuxInput = field(repr=False)
    n: int
    B: int
    R0: float
    r: float
    r1: float
    r2: float
    eps: float = 0.05
    trials: int = 400
    seed: int = 0
    cap: int = DEFAULT_CAP
    genie: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("block length n must be >= 1")
        if self.B < 2:
            raise ValidationError("need B >= 2 blocks (B - 1 message blocks)")
        if not self.eps > 0:
            raise ValidationError("eps must be > 0")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        for name in ("R0", "r", "r1", "r2"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"rate {name} must be finite")

    @classmethod
    def preset(cls, channel, aux, n, B, eps=0.05, **kw):
        """Config with the rate choice that makes every error term vanish."""
        return cls(channel, aux, n, B, eps=eps, **preset_rates(channel, aux, eps), **kw)

    def exponent(self, rate):
        return max(0, math.floor(self.n * rate + 1e-9))

    @property
    def sizes(self):
        """(|W|, |T|, |J|, |L|); negative rates give a single index."""
        return tuple(2 ** self.exponent(x) for x in (self.r, self.R0, self.r2, self.r1))


def preset_rates(channel: RelayChannel, aux: AuxInput, eps: float) -> dict:
    joint = make_joint(channel, aux)
    r = I(joint, "S", "Y") - 2 * eps
    return {
        "R0": min(I(joint, "U", "Z", "S"), I(joint, "U", "Y", "S") + r) - 2 * eps,
        "r": r,
        "r1": I(joint, "X", "Y", "US") - I(joint, "X", "Z", "US") - 2 * eps,
        "r2": I(joint, "X", "Z", "US") - eps,
    }


# ----------------------------------------------------------------------------
# codebook


@dataclass(frozen=True)
class Codebook:
    s: np.ndarray  # (W, n)
    u: np.ndarray  # (W, T, n)
    x: np.ndarray  # (W, T, J, L, n)
    phi: np.ndarray  # (T,) bin of each common message

    def cell(self, w):
        return np.flatnonzero(self.phi == w)


def _draw(rng, cdf, shape):
    """Inverse-CDF sampling; ``cdf`` broadcasts to ``shape + (k,)``."""
    k = cdf.shape[-1]
    u01 = rng.random(shape)
    return np.minimum((u01[..., None] >= cdf).sum(axis=-1), k - 1).astype(np.int16)


def _cdfs(aux: AuxInput):
    p = aux.p_usx
    ps = p.sum(axis=(0, 2))
    pus = p.sum(axis=2)  # (u, s)
    with np.errstate(invalid="ignore", divide="ignore"):
        pu_s = np.where(ps[None, :] > 0, pus / ps[None, :], 1.0 / p.shape[0]).T  # (s, u)
        px_us = np.where(pus[..., None] > 0, p / pus[..., None], 1.0 / p.shape[2])
    return np.cumsum(ps), np.cumsum(pu_s, axis=-1), np.cumsum(px_us, axis=-1)


def build_codebook(cfg: SimConfig, seed) -> Codebook:
    """Sample s(w) ~ p_S, u(w,t) ~ p(u|s(w)), x(w,t,j,l) ~ p(x|u,s) and phi."""
    W, T, J, L = cfg.sizes
    if W * T * J * L > cfg.cap:
        raise CapExceeded(
            f"codebook needs {W * T * J * L} codewords (|W||T||J||L|), cap is {cfg.cap}"
        )
    rng = np.random.default_rng(seed)
    n = cfg.n
    cdf_s, cdf_u, cdf_x = _cdfs(cfg.aux)
    s = _draw(rng, cdf_s, (W, n))
    u = _draw(rng, cdf_u[s[:, None, :]], (W, T, n))
    s_b = np.broadcast_to(s[:, None, :], (W, T, n))
    cdf = cdf_x[u, s_b][:, :, None, None, :, :]  # (W, T, 1, 1, n, |X|)
    x = _draw(rng, cdf, (W, T, J, L, n))
    phi = rng.integers(0, W, size=T)
    return Codebook(s, u, x, phi)


# ----------------------------------------------------------------------------
# one trial


@dataclass
class TrialOutcome:
    """Truth, decisions and per-message-block failure flags of one trial."""

    t: np.ndarray
    j: np.ndarray
    l: np.ndarray
    w: np.ndarray
    w_relay: np.ndarray
    t_relay: np.ndarray
    w_hat: np.ndarray
    t_hat: np.ndarray
    jl_hat: np.ndarray
    z: np.ndarray = field(repr=False)
    flags: dict = field(default_factory=dict)


class _Densities:
    def __init__(self, cfg):
        joint = make_joint(cfg.channel, cfg.aux)
        self.tables = {k: density_table(joint, k)[0] for k in
                       ("UZ|S", "SY", "UY|S", "XY|US", "XZ|US", "Z|XS", "Z|US")}
        self.h_zxs = entropy(joint, "Z", "XS")
        self.h_zus = entropy(joint, "Z", "US")
        self.i_xz = I(joint, "X", "Z", "US")
        cum = np.cumsum(cfg.channel.gamma.reshape(cfg.channel.nx, cfg.channel.ns, -1), axis=-1)
        self.cum_yz = cum

    # axis order of every table is the canonical (U, S, X, Y, Z) order
    def uz_s(self, u, s, z):
        return self.tables["UZ|S"][u, s, z].mean(axis=-1)

    def sy(self, s, y):
        return self.tables["SY"][s, y].mean(axis=-1)

    def uy_s(self, u, s, y):
        return self.tables["UY|S"][u, s, y].mean(axis=-1)

    def xy_us(self, u, s, x, y):
        return self.tables["XY|US"][u, s, x, y].mean(axis=-1)

    def xz_us(self, u, s, x, z):
        return self.tables["XZ|US"][u, s, x, z].mean(axis=-1)

    def z_xs(self, s, x, z):
        return self.tables["Z|XS"][s, x, z].mean(axis=-1)

    def z_us(self, u, s, z):
        return self.tables["Z|US"][u, s, z].mean(axis=-1)


def _unique(passing):
    """Index of the only True entry, or -1."""
    idx = np.flatnonzero(passing)
    return int(idx[0]) if idx.size == 1 else -1


def _channel(rng, dens, nz, x, s):
    u01 = rng.random(x.shape)
    k = (u01[:, None] >= dens.cum_yz[x, s]).sum(axis=-1)
    k = np.minimum(k, dens.cum_yz.shape[-1] - 1)
    return k // nz, k % nz


def run_block_trial(cfg: SimConfig, codebook: Codebook, seed, _dens=None) -> TrialOutcome:
    """Send B blocks and run decoder 2 at the relay and 1a/1b/1c at the receiver.

    The relay forwards phi of its own decoded common message (errors
    propagate); ``cfg.genie`` replaces that by the true bin.
    """
    dens = _dens or _Densities(cfg)
    rng = np.random.default_rng(seed)
    W, T, J, L = cfg.sizes
    B, eps, nz = cfg.B, cfg.eps, cfg.channel.nz
    cb = codebook

    t = np.zeros(B + 1, dtype=int)
    j = np.zeros(B + 1, dtype=int)
    l = np.zeros(B + 1, dtype=int)
    t[1:B] = rng.integers(0, T, size=B - 1)
    j[1:B] = rng.integers(0, J, size=B - 1)
    l[1:B] = rng.integers(0, L, size=B - 1)
    w = np.zeros(B + 1, dtype=int)
    w[1:] = cb.phi[t[:-1]]

    t_relay = np.zeros(B + 1, dtype=int)
    w_relay = np.zeros(B + 1, dtype=int)
    w_hat = np.zeros(B + 1, dtype=int)
    t_hat = np.zeros(B + 1, dtype=int)
    jl_hat = np.zeros((B + 1, 2), dtype=int)
    ys = np.zeros((B + 1, cfg.n), dtype=int)
    zs = np.zeros((B + 1, cfg.n), dtype=int)
    m = B - 1
    flags = {k: np.zeros(m, dtype=bool) for k in BLOCK_EVENTS}
    w_hat[1] = w[1]  # the first bin comes from the constant t_0

    for i in range(1, B + 1):
        w_relay[i] = w[i] if cfg.genie else cb.phi[t_relay[i - 1]]
        s_seq = cb.s[w_relay[i]]
        x_seq = cb.x[w[i], t[i], j[i], l[i]]
        ys[i], zs[i] = _channel(rng, dens, nz, x_seq, s_seq)

        # Decoder 2: common message of this block at the relay.
        passing = dens.uz_s(cb.u[w_relay[i]], s_seq, zs[i]) > cfg.R0 + eps
        got = _unique(passing)
        t_relay[i] = max(got, 0)
        if i <= m:
            k = i - 1
            flags["e2"][k] = got != t[i]
            s_true, u_true = cb.s[w[i]], cb.u[w[i], t[i]]
            flags["eB_zxs"][k] = dens.z_xs(s_true, x_seq, zs[i]) < dens.h_zxs - eps
            flags["eB_zus"][k] = dens.z_us(u_true, s_true, zs[i]) > dens.h_zus + eps

        if i == 1:
            continue
        k = i - 2  # message block i - 1 is decoded at the end of block i
        # Decoder 1a: this block's bin.
        got = _unique(dens.sy(cb.s, ys[i]) > cfg.r + eps)
        flags["e1a"][k] = got != w[i]
        w_hat[i] = max(got, 0)
        # Decoder 1b: previous common message inside the decoded bin.
        wp = w_hat[i - 1]
        cell = cb.cell(w_hat[i])
        score = dens.uy_s(cb.u[wp, cell], cb.s[wp], ys[i - 1]) + cfg.r
        got = _unique(score > cfg.R0 + eps)
        tt = int(cell[got]) if got >= 0 else -1
        flags["e1b"][k] = tt != t[i - 1]
        t_hat[i - 1] = max(tt, 0)
        # Decoder 1c: previous (j, l) given the decoded (w, t).
        th = t_hat[i - 1]
        cand = cb.x[wp, th].reshape(J * L, cfg.n)
        got = _unique(dens.xy_us(cb.u[wp, th], cb.s[wp], cand, ys[i - 1]) > cfg.r1 + cfg.r2 + eps)
        jl = divmod(got, L) if got >= 0 else (-1, -1)
        flags["e1c"][k] = jl != (j[i - 1], l[i - 1])
        jl_hat[i - 1] = jl

    out = TrialOutcome(t, j, l, w, w_relay, t_relay, w_hat, t_hat, jl_hat, zs, flags)
    flags["e_tau"] = tau_failures(cfg, cb, out, dens)
    return out


def tau_failures(cfg: SimConfig, codebook: Codebook, outcome: TrialOutcome, _dens=None):
    """Per-message-block failures of the eavesdropper's estimator of j."""
    dens = _dens or _Densities(cfg)
    cb, o = codebook, outcome
    out = np.zeros(cfg.B - 1, dtype=bool)
    for i in range(1, cfg.B):
        w, t, l = o.w[i], o.t[i], o.l[i]
        passing = dens.xz_us(cb.u[w, t], cb.s[w], cb.x[w, t, :, l], o.z[i]) > cfg.r2 + cfg.eps
        out[i - 1] = _unique(passing) != o.j[i]
    return out


def eavesdropper_estimate(cfg: SimConfig, pairs) -> np.ndarray:
    """Empirical per-block failure rate of the estimator over (codebook, outcome) pairs."""
    dens = _Densities(cfg)
    rows = [tau_failures(cfg, cb, o, dens) for cb, o in pairs]
    return np.mean(rows, axis=0)


# ----------------------------------------------------------------------------
# aggregation


@dataclass
class SimReport:
    n: int
    B: int
    trials: int
    seed: int
    eps: float
    rates: dict
    sizes: tuple
    e2: list
    e1a: list
    e1b: list
    e1c: list
    e_tau: list
    eB_zxs: list
    eB_zus: list
    lambda1: float
    lambda2: float
    block_lower: list
    equiv_lower: float
    equiv_block_mean: float
    equiv_target: float
    i_xz_us: float

    def to_json(self) -> dict:
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        d["equiv_lower_display"] = max(0.0, self.equiv_lower)
        return d


def lemma3_bound(cfg: SimConfig, i_xz: float, e_tau, eB_zus, eB_zxs, nz: int):
    """Per-block equivocation lower bound from the measured error rates."""
    e_tau, eB_zus, eB_zxs = (np.asarray(a, dtype=float) for a in (e_tau, eB_zus, eB_zxs))
    return (
        cfg.r1 + cfg.r2 - i_xz - 2 * cfg.eps - (3 + LOG2E) / cfg.n
        - cfg.r2 * e_tau - math.log2(nz) * (eB_zus + eB_zxs)
    )


def equivocation_report(cfg: SimConfig, rates: dict, lambdas=(0.0, 0.0)) -> SimReport:
    """Assemble the per-block and B-averaged bounds from per-block event rates."""
    joint = make_joint(cfg.channel, cfg.aux)
    i_xz = I(joint, "X", "Z", "US")
    # the value the bound approaches as every error rate vanishes and n grows;
    # r1 - 3 eps under the preset rates
    target = cfg.r1 + cfg.r2 - i_xz - 2 * cfg.eps
    block = lemma3_bound(cfg, i_xz, rates["e_tau"], rates["eB_zus"], rates["eB_zxs"], cfg.channel.nz)
    return SimReport(
        n=cfg.n,
        B=cfg.B,
        trials=cfg.trials,
        seed=cfg.seed,
        eps=cfg.eps,
        rates={"R0": cfg.R0, "r": cfg.r, "r1": cfg.r1, "r2": cfg.r2},
        sizes=cfg.sizes,
        **{k: [float(v) for v in rates[k]] for k in BLOCK_EVENTS},
        lambda1=float(lambdas[0]),
        lambda2=float(lambdas[1]),
        block_lower=[float(v) for v in block],
        equiv_lower=float(block.sum() / cfg.B),
        equiv_block_mean=float(block.mean()),
        equiv_target=float(target),
        i_xz_us=float(i_xz),
    )


def trial_seeds(seed: int, k: int):
    """(codebook seed, trial seed) for trial ``k``; independent of scheduling."""
    a, b = np.random.SeedSequence([seed, k]).spawn(2)
    return a, b


def simulate(cfg: SimConfig) -> SimReport:
    """Run ``cfg.trials`` independent trials and reduce them in trial order."""
    dens = _Densities(cfg)
    W, T, J, L = cfg.sizes
    if W * T * J * L > cfg.cap:
        raise CapExceeded(f"codebook needs {W * T * J * L} codewords, cap is {cfg.cap}")

    def one(k):
        cb_seed, tr_seed = trial_seeds(cfg.seed, k)
        cb = build_codebook(cfg, cb_seed)
        return run_block_trial(cfg, cb, tr_seed, dens).flags

    outcomes = pmap(one, range(cfg.trials))
    sums = {k: np.zeros(cfg.B - 1) for k in BLOCK_EVENTS}
    rx_fail = relay_fail = 0
    for f in outcomes:
        for k in BLOCK_EVENTS:
            sums[k] += f[k]
        rx_fail += bool(f["e1a"].any() or f["e1b"].any() or f["e1c"].any())
        relay_fail += bool(f["e2"].any())
    rates = {k: v / cfg.trials for k, v in sums.items()}
    return equivocation_report(cfg, rates, (rx_fail / cfg.trials, relay_fail / cfg.trials))
