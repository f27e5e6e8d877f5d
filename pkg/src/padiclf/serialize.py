"""Digit-string records, canonical JSON and content hashes.

Every persisted artifact is canonical JSON (sorted keys, fixed separators)
carrying a sha256 content hash, so identical configurations reproduce
bit-identical files and downstream commands can resume from them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .coefficients import MomentDistribution, PolyDualValues
from .padics import PadicContext, PadicElement


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode()).hexdigest()


def attach_hash(record: dict) -> dict:
    record = dict(record)
    record.pop("content_hash", None)
    record["content_hash"] = content_hash(record)
    return record


def verify_hash(record: dict) -> bool:
    rec = dict(record)
    stated = rec.pop("content_hash", None)
    return stated == content_hash(rec)


def write_record(path: str | Path, record: dict) -> str:
    record = attach_hash(record)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(canonical_dumps(record))
    return record["content_hash"]


def read_record(path: str | Path) -> dict:
    with open(path) as fh:
        record = json.load(fh)
    if not verify_hash(record):
        raise ValueError(f"content hash mismatch in {path}")
    return record


# -- p-adic element records ---------------------------------------------------

def _digit_string(c: int, p: int, ndigits: int) -> str:
    digits = []
    c %= p ** ndigits
    for _ in range(ndigits):
        digits.append(str(c % p))
        c //= p
    return ",".join(digits)


def _digits_to_int(s: str, p: int) -> int:
    out = 0
    for d in reversed([int(x) for x in s.split(",")] if s else []):
        out = out * p + d
    return out


def element_record(elt: PadicElement) -> dict:
    ctx = elt.ctx
    v = elt.valuation_pi()
    rel = elt.prec - elt.shift
    rows = []
    for i, row in enumerate(elt.coeffs):
        nd = max(ctx.coeff_modulus_exponent(rel, i), 0)
        rows.append([_digit_string(c, ctx.p, nd) for c in row])
    return {
        "context": ctx.name,
        "valuation": None if v is None else [v, ctx.e],
        "shift": elt.shift,
        "precision": elt.prec,
        "digits": rows,
    }


def element_from_record(record: dict, ctx: PadicContext) -> PadicElement:
    if record["context"] != ctx.name:
        raise ValueError("context id mismatch")
    coeffs = [
        [_digits_to_int(s, ctx.p) for s in row] for row in record["digits"]
    ]
    return PadicElement(ctx, tuple(tuple(r) for r in coeffs),
                        record["precision"], record["shift"])


def moments_record(dist: MomentDistribution) -> dict:
    return {
        "p": dist.p,
        "N": dist.N,
        "M": dist.M,
        "coord_weights": [list(cw) for cw in dist.coord_weights],
        "moments": [
            [list(idx), _digit_string(dist.moments[idx], dist.p, dist.precs[idx]),
             dist.precs[idx]]
            for idx in sorted(dist.moments)
        ],
    }


def moments_from_record(record: dict) -> MomentDistribution:
    p = record["p"]
    moments = {}
    precs = {}
    for idx, digits, prec in record["moments"]:
        moments[tuple(idx)] = _digits_to_int(digits, p)
        precs[tuple(idx)] = prec
    return MomentDistribution(
        p, record["N"], record["M"],
        tuple(tuple(cw) for cw in record["coord_weights"]),
        moments, precs,
    )


def dual_record(dual: PolyDualValues) -> dict:
    return {
        "coord_weights": [list(cw) for cw in dual.coord_weights],
        "values": [
            [list(idx), element_record(dual.values[idx])]
            for idx in sorted(dual.values)
        ],
    }


def dual_from_record(record: dict, ctx: PadicContext) -> PolyDualValues:
    values = {
        tuple(idx): element_from_record(rec, ctx)
        for idx, rec in record["values"]
    }
    return PolyDualValues(
        tuple(tuple(cw) for cw in record["coord_weights"]), values, ctx
    )
