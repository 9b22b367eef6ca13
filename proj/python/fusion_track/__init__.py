"""Vehicle tracking by EKF fusion of IMU and 5G range/AOA measurements.

Scenario arguments accept a dict, a JSON string, or a path to a JSON file, with the
same keys and units as the command-line config files (angles in degrees).
"""

import json
import os

from . import _core
from ._core import (
    ArgumentError,
    ConfigError,
    ErrorReport,
    GeometryError,
    NumericError,
    TopologyError,
    check_requirement,
    profile_lines,
    profiles,
    true_azimuth,
    true_range,
)

__all__ = [
    "ArgumentError",
    "ConfigError",
    "ErrorReport",
    "GeometryError",
    "NumericError",
    "TopologyError",
    "base_stations",
    "check_requirement",
    "config",
    "nearest_bs",
    "profile_lines",
    "profiles",
    "run",
    "simulate_session",
    "sweep",
    "true_azimuth",
    "true_range",
    "validate",
]


def _doc(scenario):
    if scenario is None:
        return "{}"
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    if isinstance(scenario, os.PathLike) or (
        isinstance(scenario, str) and not scenario.lstrip().startswith("{")
    ):
        with open(scenario, encoding="utf-8") as f:
            return f.read()
    return scenario


def config(scenario=None):
    """The scenario with every default filled in."""
    return json.loads(_core.normalized_config(_doc(scenario)))


def validate(scenario=None):
    """Returns (n_base_stations, n_epochs); raises ConfigError on bad input."""
    return _core.validate_config(_doc(scenario))


def run(scenario=None):
    """Single run. Arrays: epoch, t_s, truth (n, 2), estimate (n, 2), error_m; plus the pooled report."""
    return _core.run(_doc(scenario))


def sweep(scenario=None, *, isd_m=None, n_fused_bs=None, modes=None, seeds=None, jobs=0):
    return _core.sweep(_doc(scenario), isd_m, n_fused_bs, modes, seeds, jobs)


def base_stations(scenario=None):
    return _core.base_stations(_doc(scenario))


def nearest_bs(position, n, scenario=None):
    return _core.nearest_bs(_doc(scenario), tuple(position), n)


def simulate_session(scenario=None, architecture="fog"):
    return _core.simulate_session(_doc(scenario), architecture)
