"""Artifact I/O: CSV/JSON tables, verification reports and potential recipes.

Numbers are written with 17 significant digits and no timestamps, so the same
inputs always give byte-identical files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError
from .schrodinger import (Potential, harmonic_oscillator, oscillator_eigenfunction,
                          oscillator_general_solution)

FLOAT_FMT = "{:.17e}"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return FLOAT_FMT.format(float(v))


def table_text(columns, data, fmt: str = "csv") -> str:
    """Column-oriented data -> CSV (header row) or JSON {columns, rows}."""
    cols = [np.asarray(c) for c in data]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise InvalidParameterError("columns differ in length")
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(c[i]) for c in cols) for i in range(n)]
        return "\n".join(lines) + "\n"
    if fmt == "json":
        rows = [[_json_number(c[i]) for c in cols] for i in range(n)]
        return json.dumps({"columns": list(columns), "rows": rows}, separators=(",", ":")) + "\n"
    raise InvalidParameterError(f"unknown format {fmt!r}")


def _json_number(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else str(v)


def write_table(path: Path, columns, data, fmt: str = "csv") -> Path:
    path = Path(path).with_suffix("." + fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table_text(columns, data, fmt))
    return path


def write_report(path: Path, command: str, checks: list[dict], parameters: dict | None = None) -> Path:
    """{command, parameters, checks: [{check, value, tolerance, pass}], pass}."""
    clean = [{k: (_json_number(v) if isinstance(v, (float, np.floating)) else v) for k, v in c.items()}
             for c in checks]
    body = {"command": command, "parameters": parameters or {}, "checks": clean,
            "pass": all(c["pass"] for c in checks)}
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(body, indent=1, sort_keys=True, default=str) + "\n")
    return path


# --- potential recipes ------------------------------------------------------

def _encode_nu(nu):
    return "inf" if np.isinf(nu) else float(nu)


def _decode_nu(nu):
    if isinstance(nu, str):
        return float(nu)  # "inf" / "-inf"
    return float(nu)


def susy_recipe(seeds) -> dict:
    """``seeds``: (eps, nu) pairs or ("psi", n) eigenfunction seeds."""
    out = []
    for a, b in seeds:
        if a == "psi":
            out.append({"state": int(b)})
        else:
            out.append({"eps": float(a), "nu": _encode_nu(b)})
    return {"kind": "susy", "base": {"kind": "oscillator"}, "seeds": out}


def potential_from_recipe(recipe: dict) -> Potential:
    from . import confluent, susy  # local: avoid an import cycle at package load

    kind = recipe.get("kind")
    if kind == "oscillator":
        return harmonic_oscillator()
    if kind == "susy":
        seeds = []
        for s in recipe["seeds"]:
            if "state" in s:
                seeds.append(oscillator_eigenfunction(int(s["state"])))
            else:
                seeds.append(oscillator_general_solution(float(s["eps"]), _decode_nu(s["nu"])))
        return susy.partner_potential(susy.SusyTransform(tuple(seeds)), check=False)
    if kind == "confluent_psi1":
        return confluent.confluent_partner(confluent.psi1_family(float(recipe["b2"])), check=False)
    if kind == "catalogue":
        return susy.closed_form_catalogue(recipe["id"])
    raise InvalidParameterError(f"unknown potential recipe kind {kind!r}")


def potential_to_json(recipe: dict, x) -> str:
    """Recipe plus samples (x, V) at full precision."""
    x = np.asarray(x, dtype=float)
    v = potential_from_recipe(recipe)(x)
    body = {"recipe": recipe, "samples": {"x": [float(a) for a in x], "V": [float(b) for b in v]}}
    return json.dumps(body, indent=1, sort_keys=True) + "\n"


def potential_from_json(text: str) -> tuple[Potential, dict]:
    """Rebuild the potential from its recipe; also return the stored samples."""
    body = json.loads(text)
    if "recipe" not in body:
        raise InvalidParameterError("potential JSON lacks a recipe")
    samples = {k: np.asarray(v, dtype=float) for k, v in body.get("samples", {}).items()}
    return potential_from_recipe(body["recipe"]), samples
