"""Lookup of bundled and user-provided configuration files.

Names resolve against ``$TELESIM_CONFIG_DIR`` first (same models/,
couplings/, scenarios/ layout), then the package data directory; explicit
paths are used as given.
"""

from __future__ import annotations

import os
from pathlib import Path

from .coupling import CouplingConfig, haptic_cartesian_profile, load_coupling, twin_joint_profile
from .dynamics import ManipulatorModel, load_manipulator, master_6dof, slave_7dof
from .tasks import BUILDERS, TaskSpec, load_scenario

CONFIG_DIR_ENV = "TELESIM_CONFIG_DIR"

_MODEL_BUILDERS = {"slave-7dof": slave_7dof, "master-6dof": master_6dof}
_COUPLING_BUILDERS = {"haptic-cartesian": haptic_cartesian_profile, "twin-joint": twin_joint_profile}
_SCENARIO_NAMES = {
    "case1-unbolting": "unbolting",
    "case2-bolt-removal": "bolt_removal",
    "case3-cover-removal": "cover_removal",
    "case4-sorting": "sorting",
    "case5-cutting": "cutting",
}


def data_dir() -> Path:
    return Path(__file__).parent / "data"


def _search(kind: str, name: str) -> Path | None:
    stem = name if name.endswith(".yaml") else f"{name}.yaml"
    env = os.environ.get(CONFIG_DIR_ENV)
    candidates = []
    if env:
        candidates.append(Path(env) / kind / stem)
    candidates.append(data_dir() / kind / stem)
    for c in candidates:
        if c.is_file():
            return c
    return None


def resolve_model(name: str) -> ManipulatorModel:
    path = Path(name)
    if path.is_file():
        return load_manipulator(path)
    found = _search("models", name)
    if found is not None:
        return load_manipulator(found)
    if name in _MODEL_BUILDERS:
        return _MODEL_BUILDERS[name]()
    raise FileNotFoundError(f"no manipulator model named {name!r}")


def resolve_coupling(name: str) -> CouplingConfig:
    path = Path(name)
    if path.is_file():
        return load_coupling(path)
    found = _search("couplings", name)
    if found is not None:
        return load_coupling(found)
    if name in _COUPLING_BUILDERS:
        return _COUPLING_BUILDERS[name]()
    raise FileNotFoundError(f"no coupling profile named {name!r}")


def resolve_scenario(name: str) -> TaskSpec:
    path = Path(name)
    if path.is_file():
        return load_scenario(path)
    found = _search("scenarios", name)
    if found is not None:
        return load_scenario(found)
    task = _SCENARIO_NAMES.get(name, name)
    if task in BUILDERS:
        return BUILDERS[task]()
    raise FileNotFoundError(f"no scenario named {name!r}")
