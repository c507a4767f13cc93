"""Experiment configuration: one JSON document per experiment, schema-validated.

Top level::

    {"experiment": "bf" | "verify" | "mc",
     "name": str, "phi": exponent, "psi": exponent, "domain": domain,
     "seed": int, "workers": int, "tolerances": {...}, "path": {...},
     "checks": [check, ...], "output": {"dir": str, "stem": str}}

Exponents are {"kind": "stable", "alpha": a}, {"kind": "mixture", "alphas",
"weights"}, {"kind": "compose", "outer", "inner"} or {"kind": "tabulated",
"lam", "values"}. Domains are {"shape": "disk", "radius", "center"} or
{"shape": "annulus", "r_in", "radius", "center"}. Unknown keys are rejected
everywhere. Check kinds per experiment are listed in ``CHECK_KINDS``.

Tolerance defaults (the pass caps are acceptance parameters, not paper values):
    rtol 1e-8 quadrature relative tolerance
    cap 100 fitted-C cap for quadrature sweeps
    refine_tol 0.05 allowed relative change of C under grid doubling
    mc_cap 10 fitted-C cap for simulation ratio experiments
    stable_z 3 combined standard errors for "stable under n -> m n"
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from .quadrature import LEMMAS

TOLERANCE_DEFAULTS = {"rtol": 1e-8, "cap": 100.0, "refine_tol": 0.05, "mc_cap": 10.0,
                      "stable_z": 3.0}
PATH_DEFAULTS = {"c_out": 0.05, "c_in": 0.01, "floor_frac": 0.1, "time_cap": 1e3,
                 "z_time_cap": 1e3, "boundary_mode": "grid-only", "chunk": 2048}

CHECK_KINDS = {
    "bf": ("window", "laplace"),
    "verify": ("lemma", "jump-profile", "exit-time-profile", "counterexample"),
    "mc": ("lifetime", "green", "ratio", "counterexample", "refinement"),
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int = {"type": "integer", "minimum": 1}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 3}
_range = _obj({"lo": _pos, "hi": _pos, "n": {"type": "integer", "minimum": 2}},
              ("lo", "hi", "n"))
_law = {"enum": ["slope", "log"]}
_index = {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}

_EXPONENT = {
    "oneOf": [
        _obj({"kind": {"const": "stable"}, "alpha": _index}, ("kind", "alpha")),
        _obj({"kind": {"const": "mixture"}, "alphas": {"type": "array", "items": _index,
                                                       "minItems": 1},
              "weights": {"type": "array", "items": _pos, "minItems": 1}},
             ("kind", "alphas", "weights")),
        _obj({"kind": {"const": "compose"}, "outer": {"$ref": "#/$defs/exponent"},
              "inner": {"$ref": "#/$defs/exponent"}}, ("kind", "outer", "inner")),
        _obj({"kind": {"const": "tabulated"}, "lam": {"type": "array", "items": _pos,
                                                      "minItems": 2},
              "values": {"type": "array", "items": _pos, "minItems": 2}},
             ("kind", "lam", "values")),
    ]
}

_DOMAIN = {
    "oneOf": [
        _obj({"shape": {"const": "disk"}, "radius": _pos, "center": _point}, ("shape",)),
        _obj({"shape": {"const": "annulus"}, "r_in": _pos, "radius": _pos,
              "center": _point}, ("shape", "r_in")),
    ]
}

_profile = {"depths": _range, "law": _law, "expect": _num, "tol": _pos, "min_corr": _num}

_CHECKS = {
    "window": _obj({"kind": {"const": "window"}, "target": {"enum": ["phi", "psi", "psi_phi"]},
                    "range": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
                    "expect": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                    "tol": _pos}, ("kind", "target")),
    "laplace": _obj({"kind": {"const": "laplace"}, "target": {"enum": ["psi", "phi"]},
                     "lam": {"type": "array", "items": _pos, "minItems": 1},
                     "rtol": _pos}, ("kind",)),
    "lemma": _obj({"kind": {"const": "lemma"}, "lemma": {"enum": list(LEMMAS)},
                   "sweep": _obj({"lo_frac": _pos, "hi_frac": _pos,
                                  "n": {"type": "integer", "minimum": 2}}),
                   "refine": {"type": "boolean"}}, ("kind", "lemma")),
    "jump-profile": _obj(dict(kind={"const": "jump-profile"}, dy=_pos, r=_pos, diam=_pos,
                              **_profile), ("kind", "depths", "law")),
    "exit-time-profile": _obj(dict(kind={"const": "exit-time-profile"}, n_theta=_int,
                                   **_profile), ("kind", "depths", "law")),
    "counterexample": _obj({"kind": {"const": "counterexample"}, "n": _int, "r0": _pos,
                            "top_frac": _pos, "decades": _pos, "npts": _int,
                            "control": {"type": "boolean"}, "min_growth": _pos,
                            "min_corr": _num, "max_spread": _pos},
                           ("kind",)),
    "lifetime": _obj(dict(kind={"const": "lifetime"}, n=_int,
                          method={"enum": ["renewal", "path"]}, **_profile),
                     ("kind", "n", "depths", "law")),
    "green": _obj({"kind": {"const": "green"}, "n": _int, "x": _point,
                   "cells": _obj({"x_lo": _num, "y_lo": _num, "h": _pos, "nx": _int,
                                  "ny": _int}, ("x_lo", "y_lo", "h", "nx", "ny")),
                   "min_sep": _pos, "factor": _int, "max_rse": _pos,
                   "pairs": {"type": "array",
                             "items": {"type": "array", "items": _point, "minItems": 2,
                                       "maxItems": 2}}},
                  ("kind", "n", "x", "cells")),
    "ratio": _obj({"kind": {"const": "ratio"},
                   "experiment": {"enum": ["harnack", "carleson", "bhp", "interior-bhp"]},
                   "n": _int, "factor": _int, "scenario": {"type": "object"},
                   "cap": _pos}, ("kind", "experiment", "n")),
    "refinement": _obj(dict(kind={"const": "refinement"}, n=_int, depths=_range,
                            inner=_pos, max_z=_pos), ("kind", "n", "depths")),
}

# per-check stable-index overrides of phi and psi
for _k in CHECK_KINDS["verify"] + CHECK_KINDS["mc"]:
    _CHECKS[_k]["properties"].update(delta_phi=_num, gamma=_num)


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"exponent": _EXPONENT},
    "type": "object",
    "properties": {
        "experiment": {"enum": list(CHECK_KINDS)},
        "name": {"type": "string"},
        "phi": {"$ref": "#/$defs/exponent"},
        "psi": {"$ref": "#/$defs/exponent"},
        "domain": _DOMAIN,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "workers": {"type": "integer", "minimum": 1},
        "tolerances": _obj({k: _pos for k in TOLERANCE_DEFAULTS}),
        "path": _obj({"c_out": _pos, "c_in": _pos, "floor_frac": _pos, "time_cap": _pos,
                      "z_time_cap": _pos,
                      "boundary_mode": {"enum": ["grid-only", "bridge-corrected"]},
                      "chunk": _int}),
        "checks": {"type": "array", "items": {"type": "object"}},
        "output": _obj({"dir": {"type": "string"}, "stem": {"type": "string"}}),
    },
    "required": ["experiment"],
    "additionalProperties": False,
}


def _path_str(path):
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _branch(schema, instance):
    """For a oneOf keyed on "kind"/"shape", the branch matching the key (or an error text)."""
    for key in ("kind", "shape"):
        consts = [b["properties"][key]["const"] for b in schema["oneOf"]
                  if key in b.get("properties", {})]
        if consts and len(consts) == len(schema["oneOf"]):
            val = instance.get(key) if isinstance(instance, dict) else None
            if val not in consts:
                return None, (key, f"{val!r} is not one of {consts}")
            return schema["oneOf"][consts.index(val)], None
    return None, None


def _validate(doc, schema, prefix=()):
    full = schema if "$defs" in schema else {**schema, "$defs": SCHEMA["$defs"]}
    errors = list(jsonschema.Draft202012Validator(full).iter_errors(doc))
    if not errors:
        return
    # most relevant error at this level; oneOf branches are chosen below
    err = max(errors, key=jsonschema.exceptions.relevance)
    path = list(prefix) + list(err.absolute_path)
    if err.validator == "oneOf":
        # descend into the branch selected by the discriminator key
        branch, msg = _branch(err.schema, err.instance)
        if msg is not None:
            raise ConfigError(f"config error at {_path_str(path + [msg[0]])}: {msg[1]}")
        if branch is not None:
            _validate(err.instance, branch, path)
            return
    raise ConfigError(f"config error at {_path_str(path)}: {err.message}")


def validate_config(doc: dict) -> None:
    """Raise ConfigError naming the offending key path."""
    if not isinstance(doc, dict):
        raise ConfigError("config error at $: top level must be an object")
    _validate(doc, SCHEMA)
    kinds = CHECK_KINDS[doc["experiment"]]
    for i, chk in enumerate(doc.get("checks", [])):
        kind = chk.get("kind")
        if kind not in kinds:
            raise ConfigError(f"config error at $.checks[{i}].kind: {kind!r} is not one of "
                              f"{list(kinds)} for experiment {doc['experiment']!r}")
        _validate(chk, _CHECKS[kind], ("checks", i))


@dataclass
class ExperimentConfig:
    experiment: str
    name: str = "experiment"
    phi: dict = field(default_factory=lambda: {"kind": "stable", "alpha": 0.6})
    psi: dict = field(default_factory=lambda: {"kind": "stable", "alpha": 0.7})
    domain: dict = field(default_factory=lambda: {"shape": "disk", "radius": 1.0})
    seed: int = 0
    workers: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    path: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    output: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tolerances = {**TOLERANCE_DEFAULTS, **self.tolerances}
        self.path = {**PATH_DEFAULTS, **self.path}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        validate_config(doc)
        return cls(**copy.deepcopy(doc))

    def to_dict(self) -> dict:
        out = dict(experiment=self.experiment, name=self.name, phi=self.phi, psi=self.psi,
                   domain=self.domain, seed=self.seed, tolerances=self.tolerances,
                   path=self.path, checks=self.checks, output=self.output)
        if self.workers is not None:
            out["workers"] = self.workers
        return copy.deepcopy(out)

    def with_overrides(self, seed=None, workers=None, out_dir=None) -> "ExperimentConfig":
        doc = self.to_dict()
        if seed is not None:
            doc["seed"] = int(seed)
        if workers is not None:
            doc["workers"] = int(workers)
        if out_dir is not None:
            doc["output"] = {**doc.get("output", {}), "dir": str(out_dir)}
        return ExperimentConfig.from_dict(doc)


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config error: {path} is not valid JSON ({e})") from None
    return ExperimentConfig.from_dict(doc)
