"""Task scenes and world state for the five disassembly case studies.

A scenario pairs a static ``Scene`` (surfaces, contact parameters, cut path)
with a ``TaskSpec`` (success thresholds, targets, repetitions). The mutable
``WorldState`` is owned and stepped by exactly one simulation loop;
observers get snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolationError
from ..geometry import SpatialPose

UNBOLTING = "unbolting"
BOLT_REMOVAL = "bolt_removal"
COVER_REMOVAL = "cover_removal"
SORTING = "sorting"
CUTTING = "cutting"

TASK_KINDS = (UNBOLTING, BOLT_REMOVAL, COVER_REMOVAL, SORTING, CUTTING)

# default repetition counts per task kind
REPETITIONS = {UNBOLTING: 4, BOLT_REMOVAL: 8, COVER_REMOVAL: 1, SORTING: 2, CUTTING: 1}

# outcome reasons
COMPLETED = "completed"
FORCE_LIMIT_EXCEEDED = "force_limit_exceeded"
FIRST_GRASP_FAILED = "first_grasp_failed"
GRASP_LOST_OUTSIDE_CONTAINER = "grasp_lost_outside_container"
PATH_DEVIATION = "path_deviation"
INCOMPLETE_CUT = "incomplete_cut"
INCOMPLETE = "incomplete"  # timed out / script ended before the predicate was met
ABORTED = "aborted"

FAILURE_REASONS = (
    FORCE_LIMIT_EXCEEDED,
    FIRST_GRASP_FAILED,
    GRASP_LOST_OUTSIDE_CONTAINER,
    PATH_DEVIATION,
    INCOMPLETE_CUT,
    INCOMPLETE,
    ABORTED,
)


@dataclass
class Outcome:
    success: bool
    reason: str
    time_s: float

    def __post_init__(self):
        if self.success != (self.reason == COMPLETED):
            raise ContractViolationError("reason must be 'completed' exactly when success")


@dataclass(eq=False)
class ContactParams:
    k_normal: float = 10_000.0  # N/m
    b_normal: float = 50.0  # N*s/m
    b_tangent: float = 30.0  # N*s/m viscous friction


@dataclass(eq=False)
class Surface:
    """Finite planar patch: penalty contact support."""

    surface_id: str
    origin: np.ndarray
    normal: np.ndarray
    extents: tuple[float, float]  # half sizes along the two in-plane axes
    max_depth: float = 0.05  # beyond this, treat as pass-through (thin parts)
    k_scale: float = 1.0  # stiffness multiplier relative to the scene contact params

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        self.normal = np.asarray(self.normal, dtype=float).reshape(3)
        self.normal = self.normal / np.linalg.norm(self.normal)
        # in-plane orthonormal basis
        helper = np.array([1.0, 0, 0]) if abs(self.normal[0]) < 0.9 else np.array([0, 1.0, 0])
        u = np.cross(self.normal, helper)
        self.u = u / np.linalg.norm(u)
        self.v = np.cross(self.normal, self.u)

    def penetration(self, point: np.ndarray) -> float:
        """Depth below the patch (positive when inside), 0 when clear of it."""
        rel = np.asarray(point, dtype=float) - self.origin
        if abs(rel @ self.u) > self.extents[0] or abs(rel @ self.v) > self.extents[1]:
            return 0.0
        depth = -(rel @ self.normal)
        if depth <= 0.0 or depth > self.max_depth:
            return 0.0
        return float(depth)


@dataclass(eq=False)
class SceneObject:
    object_id: str
    pose: SpatialPose
    mass: float
    hold_force_required: float = 10.0  # minimum grip force to pick it up, N
    attached_to: str | None = None  # None | "gripper" | "suction"
    grasp_offset: SpatialPose | None = None  # EE -> object, while attached


@dataclass(eq=False)
class FastenerState:
    bolt_id: str
    position: np.ndarray
    axis: np.ndarray
    threads_remaining: float
    initial_turns: float
    seated: bool = True

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.axis = np.asarray(self.axis, dtype=float).reshape(3)
        self.axis = self.axis / np.linalg.norm(self.axis)


@dataclass(eq=False)
class CutPath:
    start: np.ndarray
    end: np.ndarray
    window: float  # transverse half-width, m
    max_depth: float = 0.003  # sheet thickness, m
    engage_reach: float = 0.02  # blade length below the sheet plane that still cuts, m

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float).reshape(3)
        self.end = np.asarray(self.end, dtype=float).reshape(3)
        self.length = float(np.linalg.norm(self.end - self.start))
        self.direction = (self.end - self.start) / self.length


@dataclass(eq=False)
class Scene:
    """Static geometry shared by the world and renderers."""

    surfaces: list[Surface] = field(default_factory=list)
    contact: ContactParams = field(default_factory=ContactParams)
    cut: CutPath | None = None
    k_cut: float = 2000.0  # N*s/m^2, feed-rate dependent cutting resistance

    def surface(self, surface_id: str) -> Surface:
        for s in self.surfaces:
            if s.surface_id == surface_id:
                return s
        raise KeyError(surface_id)


@dataclass(eq=False)
class TaskSpec:
    kind: str
    scene: Scene
    repetitions: int = 1
    force_limit: float = 60.0  # robot safety limit, 40 N for unbolting
    grip_force: float = 50.0
    path_window: float = 2.5e-3
    targets: list[SpatialPose] = field(default_factory=list)
    container_region: tuple[np.ndarray, np.ndarray] | None = None  # (min, max) corners
    home_q: np.ndarray | None = None
    tool: str = "gripper"
    name: str = ""
    # initial world content, deep-copied into each fresh WorldState
    fasteners: list[FastenerState] = field(default_factory=list)
    objects: list[SceneObject] = field(default_factory=list)
    # alignment tolerances, exposed as scenario data
    unbolt_lateral_tol: float = 2e-3
    unbolt_tilt_tol: float = np.deg2rad(5.0)
    unbolt_min_force: float = 5.0
    unscrew_rate: float = 1.0  # turns per second
    grasp_lateral_tol: float = 6e-3
    grasp_tilt_tol: float = np.deg2rad(10.0)
    hold_load_factor: float = 0.3  # hold capacity = factor * grip force
    suction_tilt_tol: float = np.deg2rad(5.0)
    suction_min_force: float = 20.0
    suction_capacity: float = 30.0  # N payload before a suction grip lets go

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ContractViolationError(f"unknown task kind {self.kind!r}")
        if self.repetitions < 1:
            raise ContractViolationError("repetitions must be >= 1")
        if self.force_limit <= 0 or self.path_window <= 0:
            raise ContractViolationError("force_limit and path_window must be positive")
        if not self.targets:
            raise ContractViolationError("a task needs at least one target")
        if self.container_region is not None:
            lo, hi = self.container_region
            self.container_region = (
                np.asarray(lo, dtype=float).reshape(3),
                np.asarray(hi, dtype=float).reshape(3),
            )

    def in_container(self, point: np.ndarray) -> bool:
        if self.container_region is None:
            return False
        lo, hi = self.container_region
        point = np.asarray(point, dtype=float)
        return bool(np.all(point >= lo) and np.all(point <= hi))


@dataclass(eq=False)
class WorldState:
    scene: Scene
    objects: dict[str, SceneObject] = field(default_factory=dict)
    fasteners: dict[str, FastenerState] = field(default_factory=dict)
    contacts: set = field(default_factory=set)
    deviation_flagged: bool = False
    attached_object: str | None = None
    attach_capacity: float = 0.0  # N the current grip can carry
    grasp_attempts: dict[str, int] = field(default_factory=dict)
    cut_intervals: list[tuple[float, float]] = field(default_factory=list)
    _cut_prev_s: float | None = None

    @property
    def cut_progress(self) -> float:
        """Measure of the union of covered path intervals, in [0, 1]."""
        if not self.cut_intervals:
            return 0.0
        spans = sorted(self.cut_intervals)
        total = 0.0
        cur_lo, cur_hi = spans[0]
        for lo, hi in spans[1:]:
            if lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
        total += cur_hi - cur_lo
        return float(min(total, 1.0))

    def add_cut_interval(self, s0: float, s1: float) -> None:
        lo, hi = sorted((float(s0), float(s1)))
        self.cut_intervals.append((max(lo, 0.0), min(hi, 1.0)))

    def summary(self) -> dict:
        """Compact snapshot for frames and logs."""
        return {
            "attached": self.attached_object,
            "fasteners": {
                k: round(v.threads_remaining, 6) for k, v in self.fasteners.items()
            },
            "cut_progress": round(self.cut_progress, 6),
            "deviation": self.deviation_flagged,
        }


def make_world(spec: TaskSpec) -> WorldState:
    """Fresh world for one trial of the given task."""
    import copy

    return WorldState(
        scene=spec.scene,
        objects={o.object_id: copy.deepcopy(o) for o in spec.objects},
        fasteners={f.bolt_id: copy.deepcopy(f) for f in spec.fasteners},
    )
