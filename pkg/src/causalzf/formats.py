"""JSON documents for channels, precoders, convergence records and reports.

Complex entries are ``[re, im]`` pairs. Floats are written with Python's
shortest round-trip ``repr``, so ``parse(serialize(x))`` is bit-exact.
Non-finite numbers are rejected on both read and write, except for the
explicit string ``"inf"`` used for an infinite optimal norm.

Channel document::

    {"format": "causalzf-channel", "m": 1, "n": 2,
     "coeffs": [ [[[1.0, 0.0], [0.0, 0.0]]], [[[0.0, 0.0], [1.0, 0.0]]] ]}

``coeffs`` holds ``L + 1`` matrices of ``m`` rows with ``n`` entries each.
The ``format`` key is optional on input.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .colligation import Colligation, Precoder
from .errors import MalformedInputError
from .gammaopt import ConvergenceRecord, StopReason
from .tfun import CoeffSeries
from .verify import VerificationReport

__all__ = [
    "CHANNEL_FORMAT",
    "PRECODER_FORMAT",
    "channel_from_dict",
    "channel_to_dict",
    "dumps",
    "load_channel",
    "load_precoder",
    "loads",
    "precoder_from_dict",
    "precoder_to_dict",
    "record_from_dict",
    "record_to_dict",
    "save_json",
]

CHANNEL_FORMAT = "causalzf-channel"
PRECODER_FORMAT = "causalzf-precoder"
RECORD_FORMAT = "causalzf-convergence"


def _reject_constant(name):
    raise MalformedInputError(f"non-finite number {name} is not allowed")


def loads(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"invalid JSON: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_json(path, obj):
    Path(path).write_text(dumps(obj))


def _plain(x):
    """Convert numpy scalars and nested containers to JSON-native values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    return x


def encode_matrix(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def decode_matrix(obj, rows: int, cols: int, field: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != rows:
        raise MalformedInputError(f"{field}: expected {rows} rows", field=field)
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise MalformedInputError(f"{field}[{i}]: expected {cols} entries",
                                      field=f"{field}[{i}]")
        for j, entry in enumerate(row):
            out[i, j] = _decode_entry(entry, f"{field}[{i}][{j}]")
    return out


def _decode_entry(entry, field):
    if (not isinstance(entry, list) or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)):
        raise MalformedInputError(f"{field}: expected [re, im] pair of numbers", field=field)
    re_, im_ = float(entry[0]), float(entry[1])
    if not (math.isfinite(re_) and math.isfinite(im_)):
        raise MalformedInputError(f"{field}: non-finite entry", field=field)
    return complex(re_, im_)


def _positive_int(d, key):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise MalformedInputError(f"field '{key}' must be a positive integer", field=key)
    return v


def _nonneg_int(d, key):
    v = d.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise MalformedInputError(f"field '{key}' must be a nonnegative integer", field=key)
    return v


def _require_dict(d, what):
    if not isinstance(d, dict):
        raise MalformedInputError(f"{what} document must be a JSON object")


def _check_format(d, expected):
    fmt = d.get("format", expected)
    if fmt != expected:
        raise MalformedInputError(f"field 'format' is {fmt!r}, expected {expected!r}",
                                  field="format")


def channel_to_dict(H: CoeffSeries) -> dict:
    return {"format": CHANNEL_FORMAT, "m": H.m, "n": H.n,
            "coeffs": [encode_matrix(c) for c in H.coeffs]}


def channel_from_dict(d) -> CoeffSeries:
    _require_dict(d, "channel")
    _check_format(d, CHANNEL_FORMAT)
    m, n = _positive_int(d, "m"), _positive_int(d, "n")
    coeffs = d.get("coeffs")
    if not isinstance(coeffs, list) or not coeffs:
        raise MalformedInputError("field 'coeffs' must be a nonempty list", field="coeffs")
    mats = [decode_matrix(c, m, n, f"coeffs[{k}]") for k, c in enumerate(coeffs)]
    return CoeffSeries(mats)


def load_channel(path) -> CoeffSeries:
    return channel_from_dict(loads(Path(path).read_text()))


def precoder_to_dict(G: Precoder, include_report: bool = True) -> dict:
    col = G.colligation
    d = {
        "format": PRECODER_FORMAT,
        "gamma": float(G.gamma),
        "r": col.state_dim,
        "m": col.m,
        "n": col.n,
        "A": encode_matrix(col.A),
        "B": encode_matrix(col.B),
        "C": encode_matrix(col.C),
        "D": encode_matrix(col.D),
    }
    if G.taylor is not None:
        d["taylor"] = {"K": int(G.taylor.shape[0]),
                       "coeffs": [encode_matrix(c) for c in G.taylor]}
    if G.info:
        d["info"] = _plain(G.info)
    if include_report and G.verification is not None:
        d["verification"] = _plain(G.verification.to_dict())
    return d


def precoder_from_dict(d) -> Precoder:
    _require_dict(d, "precoder")
    _check_format(d, PRECODER_FORMAT)
    gamma = d.get("gamma")
    if not isinstance(gamma, (int, float)) or isinstance(gamma, bool) \
            or not math.isfinite(gamma) or gamma <= 0:
        raise MalformedInputError("field 'gamma' must be a positive finite number", field="gamma")
    r = _nonneg_int(d, "r")
    m, n = _positive_int(d, "m"), _positive_int(d, "n")
    col = Colligation(A=decode_matrix(d.get("A"), r, r, "A"),
                      B=decode_matrix(d.get("B"), r, n, "B"),
                      C=decode_matrix(d.get("C"), m, r, "C"),
                      D=decode_matrix(d.get("D"), m, n, "D"))
    taylor = None
    if d.get("taylor") is not None:
        t = d["taylor"]
        _require_dict(t, "taylor")
        K = _nonneg_int(t, "K")
        cs = t.get("coeffs")
        if not isinstance(cs, list) or len(cs) != K:
            raise MalformedInputError(f"taylor.coeffs must hold K={K} matrices", field="taylor")
        taylor = np.stack([decode_matrix(c, n, m, f"taylor.coeffs[{k}]")
                           for k, c in enumerate(cs)]) if K else np.zeros((0, n, m), complex)
    report = None
    if d.get("verification") is not None:
        report = VerificationReport.from_dict(d["verification"])
    return Precoder(gamma=float(gamma), colligation=col, taylor=taylor,
                    verification=report, info=d.get("info", {}))


def load_precoder(path) -> Precoder:
    return precoder_from_dict(loads(Path(path).read_text()))


def _encode_gamma(g: float):
    return g if math.isfinite(g) else "inf"


def _decode_gamma(v) -> float:
    if v == "inf":
        return math.inf
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise MalformedInputError("gamma_estimate must be a finite number or 'inf'",
                                  field="gamma_estimate")
    return float(v)


def record_to_dict(rec: ConvergenceRecord) -> dict:
    return {
        "format": RECORD_FORMAT,
        "gamma_estimate": _encode_gamma(rec.gamma_estimate),
        "gamma_is_lower_bound": rec.gamma_is_lower_bound,
        "converged": rec.converged,
        "stop_reason": rec.stop_reason.value,
        "hinf_estimate": rec.hinf_estimate,
        "hinf_grid": rec.hinf_grid,
        "table": [{"N": N, "rho": rho, "sigma_max": smax} for N, rho, smax in rec.table()],
        "notes": list(rec.notes),
    }


def record_from_dict(d) -> ConvergenceRecord:
    _require_dict(d, "convergence record")
    _check_format(d, RECORD_FORMAT)
    table = d.get("table", [])
    try:
        rho_seq = [(int(row["N"]), float(row["rho"])) for row in table]
        smax_seq = [(int(row["N"]), float(row["sigma_max"])) for row in table]
        reason = StopReason(d["stop_reason"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"malformed convergence record: {exc}") from exc
    return ConvergenceRecord(rho_seq=rho_seq, sigma_max_seq=smax_seq,
                             gamma_estimate=_decode_gamma(d.get("gamma_estimate")),
                             converged=bool(d.get("converged")), stop_reason=reason,
                             hinf_grid=d.get("hinf_grid"), notes=list(d.get("notes", [])))
