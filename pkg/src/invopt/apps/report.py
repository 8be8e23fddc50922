"""Benchmark pipelines that emit (x, y) series as CSV for external plotting."""

from __future__ import annotations

import csv

import numpy as np

from .network import concordance_omega, estimate_pathway_costs
from .traffic import calibrate_traffic, equilibrium


def write_series(path, columns):
    """Write equally long columns ``{name: values}`` to a CSV file."""
    names = list(columns)
    rows = zip(*(columns[k] for k in names))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return v


def bench_pathway(network, clinical, survived=(), died=(), variant="l1"):
    """Estimate arc costs and score every supplied path by concordance.

    Returns the estimate and the series ``(path, group, omega)``.
    """
    est = estimate_pathway_costs(network, clinical, survived, died, variant=variant)
    theta = est["theta"]
    idx, groups, omegas = [], [], []
    for group, paths in (("clinical", clinical), ("survived", survived), ("died", died)):
        for k, x in enumerate(paths):
            try:
                om = concordance_omega(theta, x, network)
            except ValueError:
                om = float("nan")
            idx.append(k)
            groups.append(group)
            omegas.append(om)
    return est, {"path": idx, "group": groups, "omega": omegas}


def bench_traffic(inst, flows, kappas):
    """Calibrated weight and refit error as the ridge weight varies."""
    thetas, errors = [], []
    for kappa in kappas:
        res = calibrate_traffic(inst, flows, kappa=kappa)
        fit = equilibrium(inst, res["theta"])
        thetas.append(res["theta"])
        errors.append(float(np.max(np.abs(fit - np.asarray(flows[0], dtype=float)))))
    series = {"kappa": list(kappas)}
    for k in range(inst.degree):
        series[f"theta_{k}"] = [t[k] for t in thetas]
    series["flow_error"] = errors
    return thetas, series
