"""GP-based barrier synthesis and QP safety filtering for 2D navigation."""

from . import barrier, bench, controller, episode, gp, perception, scenario, simworld

__all__ = ["barrier", "bench", "controller", "episode", "gp", "perception",
           "scenario", "simworld"]
__version__ = "0.1.0"
