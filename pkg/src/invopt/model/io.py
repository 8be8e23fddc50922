"""JSON encodings of models, parameter spaces, datasets and application inputs.

Infinite bounds are written as ``null``; the strings ``"inf"`` and
``"-inf"`` are accepted on input.  See ``docs/formats.md``.
"""

from __future__ import annotations

import json

import numpy as np

from .data import Dataset, MDPModel, Observation
from .forward import ConvexForwardModel, LinearForwardModel
from .objectives import Basis, Linear, PowerTerm, Quadratic
from .space import (
    FixedComponent,
    L1Sphere,
    LInfSphere,
    LinearCost,
    NormToPrior,
    ParameterSpace,
    Zero,
)


class FormatError(ValueError):
    """A JSON document does not follow the expected layout."""


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _arr(v, default_inf=None):
    if v is None:
        return None
    a = np.array([_num(x, default_inf) for x in np.ravel(np.array(v, dtype=object))], dtype=float)
    return a.reshape(np.shape(np.array(v, dtype=object)))


def _num(x, default_inf):
    if x is None:
        if default_inf is None:
            raise FormatError("null is only allowed for bounds")
        return default_inf
    if isinstance(x, str):
        if x in ("inf", "+inf", "Infinity"):
            return np.inf
        if x in ("-inf", "-Infinity"):
            return -np.inf
        raise FormatError(f"not a number: {x!r}")
    return float(x)


def _bound(v, sign):
    if v is None:
        return None
    if np.isscalar(v) or isinstance(v, str):
        return _num(v, sign * np.inf)
    return _arr(v, sign * np.inf)


def _listify(a):
    if a is None:
        return None
    a = np.asarray(a, dtype=float)
    return [[_jnum(x) for x in row] for row in a] if a.ndim == 2 else [_jnum(x) for x in a]


def _jnum(x):
    x = float(x)
    return None if np.isinf(x) else x


def _require(doc, *keys):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"missing field(s): {', '.join(missing)}")


# -- forward models -------------------------------------------------------------------
def _power_term(doc):
    _require(doc, "coef")
    return PowerTerm(_arr(doc["coef"]), float(doc.get("power", 1.0)), _arr(doc.get("scale")), _arr(doc.get("S")))


def objective_from_dict(doc):
    kind = doc.get("kind")
    if kind == "linear":
        return Linear(_arr(doc["theta"]))
    if kind == "quadratic":
        _require(doc, "Phi", "psi")
        return Quadratic(_arr(doc["Phi"]), _arr(doc["psi"]), _arr(doc.get("theta")))
    if kind == "basis":
        _require(doc, "terms")
        return Basis(
            tuple(_power_term(t) for t in doc["terms"]),
            tuple(_power_term(t) for t in doc.get("base", [])),
            _arr(doc.get("theta")),
            _arr(doc.get("signs")),
        )
    raise FormatError(f"unknown objective kind {kind!r}")


def model_from_dict(doc):
    kind = doc.get("type", "linear")
    if kind == "linear":
        _require(doc, "c", "A", "b")
        integer = doc.get("integer")
        return LinearForwardModel(
            _arr(doc["c"]), _arr(doc["A"]), _arr(doc["b"]), doc.get("senses"),
            None if integer is None else np.asarray(integer, dtype=bool), doc.get("sense", "min"),
        )
    if kind == "convex":
        _require(doc, "objective", "A", "b")
        return ConvexForwardModel(objective_from_dict(doc["objective"]), _arr(doc["A"]), _arr(doc["b"]), doc.get("senses"))
    raise FormatError(f"unknown model type {kind!r}")


def model_to_dict(model):
    if isinstance(model, LinearForwardModel):
        out = {"type": "linear", "sense": model.sense, "c": _listify(model.c), "A": _listify(model.A),
               "b": _listify(model.b), "senses": list(model.senses)}
        if model.is_integer:
            out["integer"] = [bool(v) for v in model.integer]
        return out
    obj = model.objective
    if isinstance(obj, Linear):
        od = {"kind": "linear", "theta": _listify(obj.theta)}
    elif isinstance(obj, Quadratic):
        od = {"kind": "quadratic", "Phi": _listify(obj.Phi), "psi": _listify(obj.psi), "theta": _listify(obj.theta)}
    elif isinstance(obj, Basis):
        def term(t):
            return {"coef": _listify(t.coef), "power": t.power, "scale": _listify(t.scale), "S": _listify(t.S)}

        od = {"kind": "basis", "terms": [term(t) for t in obj.terms], "base": [term(t) for t in obj.base],
              "theta": _listify(obj.theta), "signs": _listify(obj.signs)}
    else:
        raise FormatError(f"cannot encode objective {type(obj).__name__}")
    return {"type": "convex", "objective": od, "A": _listify(model.A), "b": _listify(model.b),
            "senses": list(model.senses)}


# -- parameter spaces --------------------------------------------------------------------
def space_from_dict(doc):
    _require(doc, "dim")
    norm = doc.get("normalization")
    if norm is None:
        normalization = None
    elif norm == "l1":
        normalization = L1Sphere()
    elif norm == "linf":
        normalization = LInfSphere()
    elif isinstance(norm, dict) and "fixed" in norm:
        normalization = FixedComponent(int(norm["fixed"]["index"]), float(norm["fixed"].get("value", 1.0)))
    else:
        raise FormatError(f"unknown normalization {norm!r}")
    obj = doc.get("objective")
    if obj is None:
        mode = None
    elif obj == "norm1":
        mode = NormToPrior(1)
    elif obj == "norminf":
        mode = NormToPrior(np.inf)
    elif obj == "zero":
        mode = Zero()
    elif isinstance(obj, dict) and "linear" in obj:
        mode = LinearCost(_arr(obj["linear"]))
    else:
        raise FormatError(f"unknown inverse objective {obj!r}")
    return ParameterSpace(
        int(doc["dim"]), _arr(doc.get("G")), _arr(doc.get("h")), _arr(doc.get("E")), _arr(doc.get("f")),
        _bound(doc.get("lb"), -1), _bound(doc.get("ub"), 1), normalization, doc.get("norm_dims"),
        _arr(doc.get("prior")), mode,
    )


def space_to_dict(space):
    norm = space.normalization
    if norm is None:
        nd = None
    elif isinstance(norm, L1Sphere):
        nd = "l1"
    elif isinstance(norm, LInfSphere):
        nd = "linf"
    else:
        nd = {"fixed": {"index": norm.index, "value": norm.value}}
    mode = space.objective_mode
    if isinstance(mode, NormToPrior):
        od = "norm1" if mode.p == 1 else "norminf"
    elif isinstance(mode, LinearCost):
        od = {"linear": _listify(mode.w)}
    else:
        od = "zero"
    return {"dim": space.dim, "G": _listify(space.G), "h": _listify(space.h), "E": _listify(space.E),
            "f": _listify(space.f), "lb": _listify(space.lb), "ub": _listify(space.ub), "normalization": nd,
            "norm_dims": list(space.norm_dims), "prior": _listify(space.prior), "objective": od}


# -- datasets, streams, MDPs ----------------------------------------------------------------
def _observations(doc):
    out = []
    for o in doc:
        if isinstance(o, dict):
            _require(o, "x")
            out.append(Observation(_arr(o["x"]), int(o.get("instance", 0)), float(o.get("weight", 1.0))))
        else:
            out.append(Observation(_arr(o)))
    return tuple(out)


def dataset_from_dict(doc):
    _require(doc, "observations")
    if "models" in doc:
        models = tuple(model_from_dict(m) for m in doc["models"])
    elif "model" in doc:
        models = (model_from_dict(doc["model"]),)
    else:
        raise FormatError("a dataset needs 'model' or 'models'")
    return Dataset(_observations(doc["observations"]), models)


def dataset_to_dict(ds):
    return {
        "models": [model_to_dict(m) for m in ds.models],
        "observations": [{"x": _listify(o.x), "instance": o.instance, "weight": o.weight} for o in ds.observations],
    }


def stream_from_dict(doc):
    """A stream is a dataset read in order; returns ``[(x, model)]``."""
    ds = dataset_from_dict(doc)
    return [(o.x, m) for o, m in ds]


def mdp_from_dict(doc):
    _require(doc, "P", "gamma")
    space = space_from_dict(doc["reward_space"]) if doc.get("reward_space") else None
    return MDPModel(_arr(doc["P"]), float(doc["gamma"]), space)


# -- applications -------------------------------------------------------------------------
def network_from_dict(doc):
    from ..apps.network import PathNetwork

    _require(doc, "n_nodes", "arcs", "source", "sink")
    return PathNetwork(int(doc["n_nodes"]), tuple(tuple(a) for a in doc["arcs"]), int(doc["source"]), int(doc["sink"]))


def network_to_dict(net):
    return {"n_nodes": net.n_nodes, "arcs": [list(a) for a in net.arcs], "source": net.source, "sink": net.sink}


def paths_from_dict(doc, network):
    """Paths as node sequences (``{"nodes": [...]}``) or arc vectors."""
    out = {}
    for group in ("clinical", "survived", "died"):
        paths = []
        for p in doc.get(group, []):
            if isinstance(p, dict):
                paths.append(network.path_from_nodes([int(v) for v in p["nodes"]]))
            else:
                paths.append(_arr(p))
        out[group] = paths
    return out


def traffic_from_dict(doc):
    from ..apps.traffic import TrafficInstance

    _require(doc, "n_nodes", "arcs", "free_flow", "capacity", "demands")
    inst = TrafficInstance(
        int(doc["n_nodes"]), tuple(tuple(a) for a in doc["arcs"]), _arr(doc["free_flow"]), _arr(doc["capacity"]),
        tuple(tuple(d) for d in doc["demands"]), int(doc.get("degree", 1)),
    )
    flows = [_arr(x) for x in doc.get("flows", [])]
    return inst, flows


def traffic_to_dict(inst, flows=()):
    return {"n_nodes": inst.n_nodes, "arcs": [list(a) for a in inst.arcs], "free_flow": _listify(inst.free_flow),
            "capacity": _listify(inst.capacity), "demands": [list(d) for d in inst.demands], "degree": inst.degree,
            "flows": [_listify(x) for x in flows]}


LOADERS = {
    "model": model_from_dict,
    "theta_space": space_from_dict,
    "dataset": dataset_from_dict,
    "stream": stream_from_dict,
    "mdp": mdp_from_dict,
    "network": network_from_dict,
    "traffic": traffic_from_dict,
}


def load(kind, path):
    """Read and decode a JSON file of the given kind."""
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    try:
        return LOADERS[kind](doc)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed {kind} ({exc})") from exc
