"""telesim: bilateral master-slave teleoperation on simulated disassembly tasks.

The package is organized as a numpy library: ``dynamics`` for manipulator
kinematics/dynamics, ``coupling`` for the two bilateral schemes, ``tasks``
for the contact-rich scenario worlds, ``metrics`` for trial analytics,
``gateway`` for the control loop, scripted operators and the live server.
See the demos/ directory for narrative walkthroughs of each capability.
"""

from . import coupling, dynamics, gateway, logs, metrics, tasks
from .geometry import SpatialPose, Wrench
from .resources import resolve_coupling, resolve_model, resolve_scenario

__version__ = "0.1.0"

__all__ = [
    "SpatialPose",
    "Wrench",
    "coupling",
    "dynamics",
    "gateway",
    "logs",
    "metrics",
    "resolve_coupling",
    "resolve_model",
    "resolve_scenario",
    "tasks",
    "__version__",
]
