"""JSON encodings for matrices, symbols, witnesses and reports.

Matrices are encoded as ``{"rows": r, "cols": c, "data": [[re, im], ...]}``
with the data row-major and each complex entry a two-element array.  Python
floats round-trip through ``json`` exactly (shortest-repr encoding), so
serialization is lossless bit for bit.  Witness files carry a ``kind`` tag
(``sc | mc | eae | eae_special | eaoe``), their matrices by role name,
dimension metadata and the tool version.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from . import __version__
from .blockops import Block2x2
from .errors import ShapeError
from .hankel import SymbolFC
from .relations import (
    EAESpecialWitness,
    EAEWitness,
    EAOEWitness,
    MCWitness,
    SCWitness,
)

WITNESS_KINDS = ("sc", "mc", "eae", "eae_special", "eaoe")


def encode_matrix(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.complex128)
    data = [[float(z.real), float(z.imag)] for z in a.ravel(order="C")]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def decode_matrix(obj: dict) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise ShapeError(f"matrix data length {len(data)} != rows*cols {rows * cols}")
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)


def encode_symbol(f: SymbolFC) -> dict:
    return {
        "offset": int(f.offset),
        "coeffs": [[float(z.real), float(z.imag)] for z in f.coeffs],
    }


def decode_symbol(obj: dict) -> SymbolFC:
    coeffs = np.array([complex(re, im) for re, im in obj["coeffs"]],
                      dtype=np.complex128)
    return SymbolFC(offset=int(obj["offset"]), coeffs=coeffs)


# ---------------------------------------------------------------------------
# witnesses


def _file_header(kind: str) -> dict:
    return {"kind": kind, "tool": "opcoupling", "version": __version__}


def encode_witness(w) -> dict:
    """Encode any witness type; the kind tag selects the schema."""
    if isinstance(w, SCWitness):
        out = _file_header("sc")
        out["matrices"] = {
            "A": encode_matrix(w.M.a11), "B": encode_matrix(w.M.a12),
            "C": encode_matrix(w.M.a21), "D": encode_matrix(w.M.a22),
            "U": encode_matrix(w.U), "V": encode_matrix(w.V),
        }
        out["dims"] = {"n": w.n, "m": w.m}
        return out
    if isinstance(w, MCWitness):
        out = _file_header("mc")
        out["matrices"] = {
            "Uhat": encode_matrix(w.Uhat), "UhatInv": encode_matrix(w.UhatInv),
            "U": encode_matrix(w.U), "V": encode_matrix(w.V),
        }
        out["dims"] = {"n": w.n, "m": w.m}
        return out
    if isinstance(w, EAESpecialWitness):
        out = _file_header("eae_special")
        out["matrices"] = {
            "U": encode_matrix(w.U), "V": encode_matrix(w.V),
            "E": encode_matrix(w.E), "F": encode_matrix(w.F),
            "Einv": encode_matrix(w.Einv), "Finv": encode_matrix(w.Finv),
        }
        out["dims"] = {"n": w.n, "m": w.m}
        return out
    if isinstance(w, EAEWitness):
        out = _file_header("eae")
        out["matrices"] = {
            "U": encode_matrix(w.U), "V": encode_matrix(w.V),
            "E": encode_matrix(w.E), "F": encode_matrix(w.F),
        }
        out["dims"] = {"x0_dim": w.x0_dim, "y0_dim": w.y0_dim}
        return out
    if isinstance(w, EAOEWitness):
        out = _file_header("eaoe")
        out["matrices"] = {
            "U": encode_matrix(w.U), "V": encode_matrix(w.V),
            "E": encode_matrix(w.E), "F": encode_matrix(w.F),
        }
        if w.Einv is not None:
            out["matrices"]["Einv"] = encode_matrix(w.Einv)
        if w.Finv is not None:
            out["matrices"]["Finv"] = encode_matrix(w.Finv)
        out["dims"] = {"ext_dim": w.ext_dim}
        out["extended_side"] = w.extended_side
        return out
    raise ShapeError(f"cannot encode object of type {type(w).__name__}")


def decode_witness(obj: dict):
    kind = obj.get("kind")
    mats = {name: decode_matrix(enc) for name, enc in obj.get("matrices", {}).items()}
    if kind == "sc":
        return SCWitness(M=Block2x2(mats["A"], mats["B"], mats["C"], mats["D"]),
                         U=mats["U"], V=mats["V"])
    if kind == "mc":
        return MCWitness(Uhat=mats["Uhat"], UhatInv=mats["UhatInv"],
                         n=int(obj["dims"]["n"]), m=int(obj["dims"]["m"]),
                         U=mats["U"], V=mats["V"])
    if kind == "eae_special":
        return EAESpecialWitness(U=mats["U"], V=mats["V"], E=mats["E"], F=mats["F"],
                                 Einv=mats["Einv"], Finv=mats["Finv"])
    if kind == "eae":
        return EAEWitness(U=mats["U"], V=mats["V"], E=mats["E"], F=mats["F"],
                          x0_dim=int(obj["dims"]["x0_dim"]),
                          y0_dim=int(obj["dims"]["y0_dim"]))
    if kind == "eaoe":
        return EAOEWitness(extended_side=obj["extended_side"],
                           ext_dim=int(obj["dims"]["ext_dim"]),
                           E=mats["E"], F=mats["F"], U=mats["U"], V=mats["V"],
                           Einv=mats.get("Einv"), Finv=mats.get("Finv"))
    raise ShapeError(f"unknown witness kind {kind!r}")


def encode_instance(U: np.ndarray, V: np.ndarray, meta: dict | None = None) -> dict:
    out = _file_header("instance")
    out["matrices"] = {"U": encode_matrix(U), "V": encode_matrix(V)}
    if meta:
        out["meta"] = meta
    return out


def decode_instance(obj: dict) -> tuple[np.ndarray, np.ndarray]:
    if obj.get("kind") != "instance":
        raise ShapeError(f"expected an instance file, got kind {obj.get('kind')!r}")
    return decode_matrix(obj["matrices"]["U"]), decode_matrix(obj["matrices"]["V"])


# ---------------------------------------------------------------------------
# reports


def _plain(value: Any):
    """Recursively convert numpy scalars/arrays to JSON-safe Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def pipeline_report_to_dict(report) -> dict:
    out = _file_header("pipeline_report")
    out["tol"] = report.tol
    out["success"] = report.success
    out["dims"] = {"n": int(report.U.shape[0]), "m": int(report.V.shape[0])}
    out["extension_dims"] = {"x0_dim": report.x0_dim, "y0_dim": report.y0_dim}
    fred = report.fredholm
    out["indices"] = {
        "f11": fred.f11.index, "f22": fred.f22.index,
        "e11": fred.e11.index, "ehat11": fred.ehat11.index,
        "dim_h2": fred.dim_h2, "dim_g1": fred.dim_g1,
        "dim_ker_f22": fred.dim_ker_f22, "dim_ker_e11": fred.dim_ker_e11,
    }
    out["eaoe"] = {"extended_side": report.eaoe.extended_side,
                   "ext_dim": report.eaoe.ext_dim}
    out["max_residual"] = report.max_residual
    out["stages"] = [
        {"name": s.name, "residuals": _plain(s.residuals), "data": _plain(s.data)}
        for s in report.stages
    ]
    return out


def verifier_report_to_dict(report) -> dict:
    out = _file_header("verifier_report")
    out["verifier"] = report.kind
    out["tol"] = report.tol
    out["passed"] = report.passed
    out["max_residual"] = report.max_residual
    out["residuals"] = _plain(report.residuals)
    out["failures"] = sorted(
        label for label, value in report.residuals.items() if value > report.tol
    )
    out["extras"] = _plain(report.extras)
    return out


def dumps_canonical(obj: dict) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, newline at end."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"
