"""Bundled disassembly scenarios and the scenario file format.

Five scenes mirror the module-stack case studies: unscrewing the stack
fasteners, extracting the loose bolts, lifting the cover plate, suction
sorting of modules, and contact cutting of a benchmark sheet. Geometry is
desk scale and sits under the slave's home pose; every threshold is plain
scenario data.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from ..dynamics.defaults import SLAVE_HOME_Q
from ..errors import ParseError, UnsupportedVersionError
from ..geometry import SpatialPose
from .world import (
    BOLT_REMOVAL,
    COVER_REMOVAL,
    CUTTING,
    REPETITIONS,
    SORTING,
    UNBOLTING,
    ContactParams,
    CutPath,
    FastenerState,
    Scene,
    SceneObject,
    Surface,
    TaskSpec,
)

SCENARIO_FORMAT_VERSION = 1

# shared work-area layout (slave base frame, meters)
_PLATE_Z = 0.20
_BOLT_HEAD = 0.008
_CONTAINER = (np.array([0.34, 0.22, 0.10]), np.array([0.56, 0.44, 0.42]))

_DOWN = SpatialPose.identity().rotation  # targets carry identity orientation


def _plate(extents=(0.25, 0.22)) -> Surface:
    return Surface("plate", (0.45, 0.0, _PLATE_Z), (0, 0, 1), extents)


def _pose(xyz) -> SpatialPose:
    return SpatialPose.from_parts(xyz)


def unbolting_scenario() -> TaskSpec:
    """Case study 1: unscrew the four stack fasteners with the socket wrench."""
    ys = (-0.15, -0.05, 0.05, 0.15)
    top = _PLATE_Z + _BOLT_HEAD
    fasteners = [
        FastenerState(f"bolt{i+1}", (0.45, y, top), (0, 0, 1), 5.0, 5.0)
        for i, y in enumerate(ys)
    ]
    surfaces = [_plate()] + [
        Surface(f"bolt{i+1}-top", (0.45, y, top), (0, 0, 1), (0.008, 0.008))
        for i, y in enumerate(ys)
    ]
    return TaskSpec(
        kind=UNBOLTING,
        name="case1-unbolting",
        tool="wrench",
        scene=Scene(surfaces=surfaces),
        repetitions=REPETITIONS[UNBOLTING],
        force_limit=40.0,
        targets=[_pose(f.position) for f in fasteners],
        home_q=SLAVE_HOME_Q.copy(),
        fasteners=fasteners,
    )


def bolt_removal_scenario() -> TaskSpec:
    """Case study 2: grasp each loose fastener and drop it in the container."""
    spots = [(x, y) for x in (0.42, 0.50) for y in (-0.15, -0.05, 0.05, 0.15)]
    top = _PLATE_Z + _BOLT_HEAD
    objects = [
        SceneObject(f"bolt{i+1}", _pose((x, y, top)), mass=0.02, hold_force_required=15.0)
        for i, (x, y) in enumerate(spots)
    ]
    return TaskSpec(
        kind=BOLT_REMOVAL,
        name="case2-bolt-removal",
        tool="gripper",
        scene=Scene(surfaces=[_plate()]),
        repetitions=REPETITIONS[BOLT_REMOVAL],
        force_limit=60.0,
        grip_force=50.0,
        targets=[o.pose.copy() for o in objects],
        container_region=_CONTAINER,
        home_q=SLAVE_HOME_Q.copy(),
        objects=objects,
    )


def cover_removal_scenario() -> TaskSpec:
    """Case study 3: lift the module cover plate (~14 N) into the container."""
    grasp = (0.45, 0.0, _PLATE_Z + 0.02)
    cover = SceneObject("cover", _pose(grasp), mass=1.43, hold_force_required=40.0)
    surfaces = [_plate(), Surface("cover-top", grasp, (0, 0, 1), (0.12, 0.09))]
    return TaskSpec(
        kind=COVER_REMOVAL,
        name="case3-cover-removal",
        tool="gripper",
        scene=Scene(surfaces=surfaces),
        repetitions=REPETITIONS[COVER_REMOVAL],
        force_limit=60.0,
        grip_force=60.0,
        targets=[cover.pose.copy()],
        container_region=_CONTAINER,
        home_q=SLAVE_HOME_Q.copy(),
        objects=[cover],
    )


def sorting_scenario() -> TaskSpec:
    """Case study 4: vacuum-lift two modules (~8 N each) into the container."""
    tops = [(0.42, -0.07, 0.26), (0.42, 0.07, 0.26)]
    objects = [
        SceneObject(f"module{i+1}", _pose(top), mass=0.82, hold_force_required=20.0)
        for i, top in enumerate(tops)
    ]
    surfaces = [_plate()] + [
        Surface(f"module{i+1}-top", top, (0, 0, 1), (0.06, 0.045))
        for i, top in enumerate(tops)
    ]
    return TaskSpec(
        kind=SORTING,
        name="case4-sorting",
        tool="suction",
        scene=Scene(surfaces=surfaces),
        repetitions=REPETITIONS[SORTING],
        force_limit=60.0,
        targets=[_pose(top) for top in tops],
        container_region=_CONTAINER,
        home_q=SLAVE_HOME_Q.copy(),
        objects=objects,
    )


def cutting_scenario() -> TaskSpec:
    """Case study 5: cut the benchmark sheet along a straight marked path."""
    start, end = (0.40, -0.10, 0.21), (0.40, 0.10, 0.21)
    sheet = Surface("sheet", (0.42, 0.0, 0.21), (0, 0, 1), (0.14, 0.14), max_depth=0.003, k_scale=0.2)
    scene = Scene(surfaces=[sheet], cut=CutPath(start, end, window=2.5e-3, max_depth=0.003))
    return TaskSpec(
        kind=CUTTING,
        name="case5-cutting",
        tool="cutter",
        scene=scene,
        repetitions=REPETITIONS[CUTTING],
        force_limit=60.0,
        path_window=2.5e-3,
        targets=[_pose(start), _pose(end)],
        home_q=SLAVE_HOME_Q.copy(),
    )


BUILDERS = {
    UNBOLTING: unbolting_scenario,
    BOLT_REMOVAL: bolt_removal_scenario,
    COVER_REMOVAL: cover_removal_scenario,
    SORTING: sorting_scenario,
    CUTTING: cutting_scenario,
}


# --- scenario files -------------------------------------------------------------

def _vec(v):
    return [float(x) for x in np.asarray(v).reshape(-1)]


def scenario_to_tree(spec: TaskSpec) -> dict:
    tree = {
        "format_version": SCENARIO_FORMAT_VERSION,
        "kind": "scenario",
        "name": spec.name,
        "task": spec.kind,
        "tool": spec.tool,
        "repetitions": int(spec.repetitions),
        "force_limit": float(spec.force_limit),
        "grip_force": float(spec.grip_force),
        "path_window": float(spec.path_window),
        "home_q": _vec(spec.home_q) if spec.home_q is not None else None,
        "contact": {
            "k_normal": float(spec.scene.contact.k_normal),
            "b_normal": float(spec.scene.contact.b_normal),
            "b_tangent": float(spec.scene.contact.b_tangent),
        },
        "k_cut": float(spec.scene.k_cut),
        "tolerances": {
            "unbolt_lateral": float(spec.unbolt_lateral_tol),
            "unbolt_tilt_deg": float(np.rad2deg(spec.unbolt_tilt_tol)),
            "unbolt_min_force": float(spec.unbolt_min_force),
            "unscrew_rate": float(spec.unscrew_rate),
            "grasp_lateral": float(spec.grasp_lateral_tol),
            "grasp_tilt_deg": float(np.rad2deg(spec.grasp_tilt_tol)),
            "hold_load_factor": float(spec.hold_load_factor),
            "suction_tilt_deg": float(np.rad2deg(spec.suction_tilt_tol)),
            "suction_min_force": float(spec.suction_min_force),
            "suction_capacity": float(spec.suction_capacity),
        },
        "surfaces": [
            {
                "id": s.surface_id,
                "origin": _vec(s.origin),
                "normal": _vec(s.normal),
                "extents": [float(s.extents[0]), float(s.extents[1])],
                "max_depth": float(s.max_depth),
                "k_scale": float(s.k_scale),
            }
            for s in spec.scene.surfaces
        ],
        "fasteners": [
            {
                "id": f.bolt_id,
                "position": _vec(f.position),
                "axis": _vec(f.axis),
                "turns": float(f.initial_turns),
            }
            for f in spec.fasteners
        ],
        "objects": [
            {
                "id": o.object_id,
                "position": _vec(o.pose.translation),
                "rotation_quat": _vec(o.pose.rotation),
                "mass": float(o.mass),
                "hold_force_required": float(o.hold_force_required),
            }
            for o in spec.objects
        ],
        "targets": [
            {"translation": _vec(t.translation), "rotation_quat": _vec(t.rotation)}
            for t in spec.targets
        ],
    }
    if spec.container_region is not None:
        lo, hi = spec.container_region
        tree["container_region"] = {"min": _vec(lo), "max": _vec(hi)}
    else:
        tree["container_region"] = None
    if spec.scene.cut is not None:
        cut = spec.scene.cut
        tree["cut"] = {
            "start": _vec(cut.start),
            "end": _vec(cut.end),
            "window": float(cut.window),
            "max_depth": float(cut.max_depth),
            "engage_reach": float(cut.engage_reach),
        }
    else:
        tree["cut"] = None
    return tree


def scenario_from_tree(tree: dict) -> TaskSpec:
    version = tree.get("format_version")
    if version != SCENARIO_FORMAT_VERSION:
        raise UnsupportedVersionError(f"scenario format_version {version!r} not supported")
    contact = tree.get("contact", {})
    scene = Scene(
        surfaces=[
            Surface(
                s["id"],
                s["origin"],
                s["normal"],
                (float(s["extents"][0]), float(s["extents"][1])),
                max_depth=float(s.get("max_depth", 0.05)),
                k_scale=float(s.get("k_scale", 1.0)),
            )
            for s in tree.get("surfaces", [])
        ],
        contact=ContactParams(
            k_normal=float(contact.get("k_normal", 10_000.0)),
            b_normal=float(contact.get("b_normal", 50.0)),
            b_tangent=float(contact.get("b_tangent", 30.0)),
        ),
        k_cut=float(tree.get("k_cut", 2000.0)),
    )
    if tree.get("cut"):
        cut = tree["cut"]
        scene.cut = CutPath(
            cut["start"], cut["end"], float(cut["window"]),
            float(cut.get("max_depth", 0.003)), float(cut.get("engage_reach", 0.02)),
        )
    tol = tree.get("tolerances", {})
    container = tree.get("container_region")
    spec = TaskSpec(
        kind=tree["task"],
        name=str(tree.get("name", "")),
        tool=str(tree.get("tool", "gripper")),
        scene=scene,
        repetitions=int(tree.get("repetitions", 1)),
        force_limit=float(tree.get("force_limit", 60.0)),
        grip_force=float(tree.get("grip_force", 50.0)),
        path_window=float(tree.get("path_window", 2.5e-3)),
        targets=[
            SpatialPose.from_parts(t["translation"], t.get("rotation_quat"))
            for t in tree.get("targets", [])
        ],
        container_region=(container["min"], container["max"]) if container else None,
        home_q=np.asarray(tree["home_q"], dtype=float) if tree.get("home_q") else None,
        fasteners=[
            FastenerState(f["id"], f["position"], f["axis"], float(f["turns"]), float(f["turns"]))
            for f in tree.get("fasteners", [])
        ],
        objects=[
            SceneObject(
                o["id"],
                SpatialPose.from_parts(o["position"], o.get("rotation_quat")),
                mass=float(o["mass"]),
                hold_force_required=float(o.get("hold_force_required", 10.0)),
            )
            for o in tree.get("objects", [])
        ],
        unbolt_lateral_tol=float(tol.get("unbolt_lateral", 2e-3)),
        unbolt_tilt_tol=float(np.deg2rad(tol.get("unbolt_tilt_deg", 5.0))),
        unbolt_min_force=float(tol.get("unbolt_min_force", 5.0)),
        unscrew_rate=float(tol.get("unscrew_rate", 1.0)),
        grasp_lateral_tol=float(tol.get("grasp_lateral", 6e-3)),
        grasp_tilt_tol=float(np.deg2rad(tol.get("grasp_tilt_deg", 10.0))),
        hold_load_factor=float(tol.get("hold_load_factor", 0.3)),
        suction_tilt_tol=float(np.deg2rad(tol.get("suction_tilt_deg", 5.0))),
        suction_min_force=float(tol.get("suction_min_force", 20.0)),
        suction_capacity=float(tol.get("suction_capacity", 30.0)),
    )
    return spec


def save_scenario(spec: TaskSpec, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_tree(spec), sort_keys=False))


def load_scenario(path) -> TaskSpec:
    tree = yaml.safe_load(Path(path).read_text())
    if not isinstance(tree, dict):
        raise ParseError(f"scenario file {path} is not a key-value tree")
    return scenario_from_tree(tree)
