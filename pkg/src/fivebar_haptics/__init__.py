"""Control and simulation toolkit for a two-point five-bar-linkage
fingertip haptic display: linkage kinematics and statics, tactile pattern
compilation, servo command streaming, and perception-experiment analysis.
"""

from . import device, errors, experiment, kinematics, patterns, servo, stats

__version__ = "0.1.0"

__all__ = [
    "device",
    "errors",
    "experiment",
    "kinematics",
    "patterns",
    "servo",
    "stats",
    "__version__",
]
