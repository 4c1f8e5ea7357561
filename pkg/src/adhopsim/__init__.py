"""Ant-colony routing simulator for mobile wireless sensor networks."""
from adhopsim.config import PROTOCOLS, Scenario, load_scenario
from adhopsim.kernels import BACKEND
from adhopsim.metrics import MetricsReport, delivery_ratio, energy_stats, routing_overhead
from adhopsim.sim import Simulation

__version__ = "0.1.0"

__all__ = ["PROTOCOLS", "Scenario", "load_scenario", "BACKEND", "MetricsReport", "delivery_ratio",
           "energy_stats", "routing_overhead", "Simulation", "__version__"]
