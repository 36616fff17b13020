from .ops import (
    ENGAGED,
    GRASPED,
    MISSED,
    NOT_ENGAGED,
    advance_fastener,
    attempt_grasp,
    contact_wrench,
    cutting_wrench,
    evaluate_outcome,
    release,
    suction_engage,
    surface_normal_force,
    tool_axis,
    update_attachment,
)
from .scenarios import (
    BUILDERS,
    SCENARIO_FORMAT_VERSION,
    bolt_removal_scenario,
    cover_removal_scenario,
    cutting_scenario,
    load_scenario,
    save_scenario,
    scenario_from_tree,
    scenario_to_tree,
    sorting_scenario,
    unbolting_scenario,
)
from .world import (
    ABORTED,
    BOLT_REMOVAL,
    COMPLETED,
    COVER_REMOVAL,
    CUTTING,
    FAILURE_REASONS,
    FIRST_GRASP_FAILED,
    FORCE_LIMIT_EXCEEDED,
    GRASP_LOST_OUTSIDE_CONTAINER,
    INCOMPLETE,
    INCOMPLETE_CUT,
    PATH_DEVIATION,
    REPETITIONS,
    SORTING,
    TASK_KINDS,
    UNBOLTING,
    ContactParams,
    CutPath,
    FastenerState,
    Outcome,
    Scene,
    SceneObject,
    Surface,
    TaskSpec,
    WorldState,
    make_world,
)

__all__ = [name for name in dir() if not name.startswith("_")]
