"""Reference applications: care pathways, traffic calibration and instance generators."""

from .generators import PlantedInstance, covering_lp, generate_instance, layered_network
from .network import PathNetwork, concordance_omega, estimate_pathway_costs
from .report import bench_pathway, bench_traffic, write_series
from .traffic import TrafficInstance, calibrate_traffic, decompose, equilibrium, forward_model

__all__ = [
    "PathNetwork",
    "PlantedInstance",
    "TrafficInstance",
    "bench_pathway",
    "bench_traffic",
    "calibrate_traffic",
    "concordance_omega",
    "covering_lp",
    "decompose",
    "equilibrium",
    "estimate_pathway_costs",
    "forward_model",
    "generate_instance",
    "layered_network",
    "write_series",
]
