"""Strict JSON readers/writers for channels and inputs, and CSV emission."""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .channel import AuxInput, AuxInputP2, AuxInputV, RelayChannel, validate_channel
from .errors import NegativeEntry, RowSumMismatch, SizeMismatch, ValidationError

CHANNEL_KEYS = {"X", "S", "Y", "Z", "gamma"}
FACTOR_TOL = 1e-12


def _reject_constant(name):
    raise ValidationError(f"non-finite JSON constant {name}")


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ValidationError(f"duplicate key {k!r}")
        out[k] = v
    return out


def parse_json(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}") from None


def read_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_json(text)


def _positive_int(obj, key):
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ValidationError(f"{key!r} must be a positive integer, got {v!r}")
    return v


def _tensor(nested, what):
    try:
        arr = np.array(nested, dtype=np.float64)
    except (ValueError, TypeError):
        raise ValidationError(f"{what} must be a rectangular array of numbers") from None
    if arr.dtype == object:
        raise ValidationError(f"{what} must be a rectangular array of numbers")
    return arr


def _check_keys(obj, allowed, required, what):
    if not isinstance(obj, dict):
        raise ValidationError(f"{what} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(f"unknown key(s) in {what}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValidationError(f"missing key(s) in {what}: {sorted(missing)}")


def channel_from_obj(obj) -> RelayChannel:
    _check_keys(obj, CHANNEL_KEYS, CHANNEL_KEYS, "channel file")
    sizes = tuple(_positive_int(obj, k) for k in ("X", "S", "Y", "Z"))
    return validate_channel(_tensor(obj["gamma"], "gamma"), sizes)


def load_channel(path) -> RelayChannel:
    return channel_from_obj(read_json(path))


def channel_to_obj(channel: RelayChannel) -> dict:
    nx, ns, ny, nz = channel.sizes
    return {"X": nx, "S": ns, "Y": ny, "Z": nz, "gamma": channel.gamma.tolist()}


def input_from_obj(obj, channel: RelayChannel | None = None):
    """Parse an input file.

    ``{"U": u, "p": p[u][s][x]}``          -> AuxInput (P1)
    ``{"U": u, "p": p[u][s][x][z]}``       -> AuxInputP2 (needs ``channel``)
    ``{"U": u, "V": v, "p": p[u][v][s][x]}`` -> AuxInputV, checked to factor
    as p(u,v,s) p(x|v).
    """
    _check_keys(obj, {"U", "V", "p"}, {"U", "p"}, "input file")
    nu = _positive_int(obj, "U")
    p = _tensor(obj["p"], "p")
    if p.shape[:1] != (nu,):
        raise SizeMismatch(f"p has leading size {p.shape[:1]}, declared U = {nu}")
    if "V" in obj:
        nv = _positive_int(obj, "V")
        if p.ndim != 4 or p.shape[1] != nv:
            raise SizeMismatch("an input with V needs p[u][v][s][x]")
        return _factor_v(p)
    if p.ndim == 3:
        aux = AuxInput(p)
    elif p.ndim == 4:
        if channel is None:
            raise ValidationError("a p[u][s][x][z] input needs the channel to be checked")
        aux = AuxInputP2(p)
    else:
        raise SizeMismatch(f"p must have 3 or 4 axes, got {p.ndim}")
    if channel is not None:
        _, ns, nx = aux.p_usx.shape if isinstance(aux, AuxInput) else aux.p_usxz.shape[:3]
        if (ns, nx) != (channel.ns, channel.nx):
            raise SizeMismatch("input alphabets do not match the channel")
    return aux


def _factor_v(p):
    if np.any(p < 0):
        raise NegativeEntry("p has a negative entry")
    dev = float(p.sum()) - 1.0
    if abs(dev) > FACTOR_TOL:
        raise RowSumMismatch((), dev)
    p_uvs = p.sum(axis=3)
    p_vx = p.sum(axis=(0, 2))
    p_v = p_vx.sum(axis=1)
    nx = p.shape[3]
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(p_v[:, None] > 0, p_vx / p_v[:, None], 1.0 / nx)
    err = np.max(np.abs(p - p_uvs[..., None] * k[None, :, None, :]))
    if err > FACTOR_TOL:
        raise ValidationError(f"input does not factor as p(u,v,s) p(x|v) (error {err:.3e})")
    return AuxInputV(p_uvs, k / k.sum(axis=1, keepdims=True))


def load_input(path, channel: RelayChannel | None = None):
    return input_from_obj(read_json(path), channel)


def input_to_obj(aux) -> dict:
    if isinstance(aux, AuxInput):
        return {"U": aux.nu, "p": aux.p_usx.tolist()}
    if isinstance(aux, AuxInputP2):
        return {"U": aux.nu, "p": aux.p_usxz.tolist()}
    if isinstance(aux, AuxInputV):
        return {"U": aux.nu, "V": aux.nv, "p": aux.p_uvsx.tolist()}
    raise TypeError(type(aux).__name__)


def dumps(obj) -> str:
    """Deterministic JSON text (sorted keys, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def fmt(x) -> str:
    """Locale-free shortest round-trip float text; empty for None."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


TRACE_HEADER = ("bound", "R0", "R1", "Re", "slack_min")
GAUSS_HEADER = ("region", "theta", "eta", "R0", "R1", "Re")


def trace_csv(bound_name, points) -> str:
    return csv_text(TRACE_HEADER, [(bound_name, p.R0, p.R1, p.Re, p.slack_min) for p in points])


def gaussian_csv(points) -> str:
    return csv_text(GAUSS_HEADER, [(p.region, p.theta, p.eta, p.R0, p.R1, p.Re) for p in points])


def read_csv(text: str):
    """Header and rows, numbers parsed as floats (empty cells -> None)."""
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise ValidationError("empty CSV")
    header, body = rows[0], rows[1:]

    def cell(c):
        if c == "":
            return None
        try:
            return float(c)
        except ValueError:
            return c

    return header, [[cell(c) for c in r] for r in body]
