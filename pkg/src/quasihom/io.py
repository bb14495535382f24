"""JSON medium specifications in, CSV tables out."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidMaterialError
from .material import (Bilaminate, LinearProfile, MediumSpec, SinusoidalProfile,
                       TabulatedPeriodic, TabulatedProfile)

_MACRO_KEYS = {
    "linear": {"gamma_G", "gamma_rho"},
    "sinusoidal": {"gamma_G", "beta_G", "gamma_rho", "beta_rho"},
    "tabulated": {"G", "rho", "periodic"},
}
_MICRO_KEYS = {
    "bilaminate": {"alpha", "delta_G", "delta_rho"},
    "tabulated_periodic": {"G", "rho", "interfaces"},
}


def _split(block, table, what):
    if not isinstance(block, dict) or "kind" not in block:
        raise InvalidMaterialError(f"{what} must be an object with a 'kind' key")
    kind = str(block["kind"]).lower()
    if kind not in table:
        raise InvalidMaterialError(f"unknown {what} kind {kind!r}; expected one of {sorted(table)}")
    extra = set(block) - table[kind] - {"kind"}
    if extra:
        raise InvalidMaterialError(f"unexpected {what} keys: {sorted(extra)}")
    return kind, {k: v for k, v in block.items() if k != "kind"}


def macro_from_dict(block):
    kind, p = _split(block, _MACRO_KEYS, "macro")
    if kind == "linear":
        return LinearProfile(float(p.get("gamma_G", 0.0)), float(p.get("gamma_rho", 0.0)))
    if kind == "sinusoidal":
        return SinusoidalProfile(float(p.get("gamma_G", 0.0)), float(p.get("beta_G", 0.0)),
                                 float(p.get("gamma_rho", 0.0)), float(p.get("beta_rho", 0.0)))
    return TabulatedProfile(p["G"], p["rho"], bool(p.get("periodic", False)))


def micro_from_dict(block):
    kind, p = _split(block, _MICRO_KEYS, "micro")
    if kind == "bilaminate":
        return Bilaminate(float(p.get("alpha", 0.5)), float(p.get("delta_G", 0.0)),
                          float(p.get("delta_rho", 0.0)))
    return TabulatedPeriodic(p["G"], p["rho"], p.get("interfaces", ()))


def spec_from_dict(doc, name=""):
    """Build a MediumSpec from the parsed JSON document."""
    if not isinstance(doc, dict):
        raise InvalidMaterialError("medium specification must be a JSON object")
    extra = set(doc) - {"macro", "micro", "separation", "epsilon_inverse", "name"}
    if extra:
        raise InvalidMaterialError(f"unexpected top-level keys: {sorted(extra)}")
    for key in ("macro", "micro"):
        if key not in doc:
            raise InvalidMaterialError(f"missing {key!r} block")
    try:
        return MediumSpec(macro_from_dict(doc["macro"]), micro_from_dict(doc["micro"]),
                          doc.get("separation", "additive"), doc.get("epsilon_inverse", 50),
                          doc.get("name", name))
    except InvalidMaterialError:
        raise
    except (TypeError, KeyError, ValueError) as exc:
        raise InvalidMaterialError(f"malformed medium specification: {exc}") from exc


def load_spec(path):
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidMaterialError(f"cannot read {path}: {exc}") from exc
    return spec_from_dict(doc, name=path.stem)


def spec_to_dict(spec):
    """Inverse of :func:`spec_from_dict` for the analytic profile kinds."""
    m, u = spec.macro, spec.micro
    if isinstance(m, LinearProfile):
        macro = {"kind": "linear", "gamma_G": m.gamma_G, "gamma_rho": m.gamma_rho}
    elif isinstance(m, SinusoidalProfile):
        macro = {"kind": "sinusoidal", "gamma_G": m.gamma_G, "beta_G": m.beta_G,
                 "gamma_rho": m.gamma_rho, "beta_rho": m.beta_rho}
    else:
        macro = {"kind": "tabulated", "G": m.G_samples.tolist(),
                 "rho": m.rho_samples.tolist(), "periodic": m.periodic}
    if isinstance(u, Bilaminate):
        micro = {"kind": "bilaminate", "alpha": u.alpha, "delta_G": u.delta_G,
                 "delta_rho": u.delta_rho}
    else:
        micro = {"kind": "tabulated_periodic", "G": u.G_samples.tolist(),
                 "rho": u.rho_samples.tolist(), "interfaces": list(u.interfaces)}
    return {"macro": macro, "micro": micro, "separation": spec.separation,
            "epsilon_inverse": spec.epsilon_inverse}


def format_value(v):
    """Shortest decimal string that round-trips the float exactly."""
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, header, rows):
    """Write a single-header CSV with round-trip float formatting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=object) if not isinstance(rows, np.ndarray) else rows
    with path.open("w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")
    return path


def read_csv(path):
    """Header list and float array of a CSV written by :func:`write_csv`."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, data
