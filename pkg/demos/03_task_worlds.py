"""Contact-rich task mechanics, poked directly at the ops level.

Walks the five scenario worlds through their core interactions: penalty
contact, unscrewing, grasping with capture windows and hold capacity,
suction engagement, and path-tracked cutting.
"""

import numpy as np

from telesim.geometry import SpatialPose, quat_from_axis_angle, quat_multiply
from telesim.tasks import (
    advance_fastener,
    attempt_grasp,
    bolt_removal_scenario,
    contact_wrench,
    cover_removal_scenario,
    cutting_scenario,
    cutting_wrench,
    make_world,
    sorting_scenario,
    suction_engage,
    unbolting_scenario,
    update_attachment,
)

FACE_DOWN = np.array([0.0, 1.0, 0.0, 0.0])


def tool_at(x, y, z, tilt=0.0):
    rot = FACE_DOWN
    if tilt:
        rot = quat_multiply(quat_from_axis_angle((1, 0, 0), tilt), rot)
    return SpatialPose(rotation=rot, translation=(x, y, z))


# --- penalty contact ------------------------------------------------------------
world = make_world(unbolting_scenario())
for depth_mm in (0.0, 0.5, 1.0, 1.5):
    w = contact_wrench(world, tool_at(0.45, -0.15, 0.208 - depth_mm * 1e-3), np.zeros(6))
    print(f"press depth {depth_mm:3.1f} mm -> normal force {w.force[2]:5.1f} N")

# --- unscrewing -------------------------------------------------------------------
tool = tool_at(0.45, -0.15, 0.2068)
for _ in range(300):
    advance_fastener(world, "bolt1", tool, True, dt=0.01)
bolt = world.fasteners["bolt1"]
print(f"\nafter 3 s on the spindle: {bolt.threads_remaining:.1f} turns left "
      f"(seated: {bolt.seated})")

# --- grasping ----------------------------------------------------------------------
world = make_world(bolt_removal_scenario())
print("\ngrasp centered:", attempt_grasp(world, tool_at(0.42, -0.15, 0.208), 50.0, "bolt1"))
world = make_world(bolt_removal_scenario())
print("grasp 20 mm off:", attempt_grasp(world, tool_at(0.44, -0.15, 0.208), 50.0, "bolt1"))

world = make_world(cover_removal_scenario())
attempt_grasp(world, tool_at(0.45, 0.0, 0.22), 45.0, "cover")  # capacity 13.5 N < 14 N weight
events = update_attachment(world, tool_at(0.45, 0.0, 0.30))
print("weak grip on the 14 N cover during lift ->", events[0][0])

# --- suction --------------------------------------------------------------------------
world = make_world(sorting_scenario())
print("\nsuction perpendicular, 25 N:", suction_engage(world, tool_at(0.42, -0.07, 0.26), 25.0))
world = make_world(sorting_scenario())
print("suction 15deg tilt,   25 N:",
      suction_engage(world, tool_at(0.42, -0.07, 0.26, tilt=np.deg2rad(15)), 25.0))

# --- cutting ---------------------------------------------------------------------------
world = make_world(cutting_scenario())
feed = np.array([0.0, 0.02, 0.0])
for y in np.linspace(-0.105, 0.105, 400):
    cutting_wrench(world, tool_at(0.40, y, 0.208), feed, True)
print(f"\nfull pass along the path: coverage {world.cut_progress:.3f}, "
      f"deviation flagged: {world.deviation_flagged}")
world = make_world(cutting_scenario())
cutting_wrench(world, tool_at(0.403, 0.0, 0.208), feed, True)  # 3 mm off the centre line
print(f"3 mm transverse excursion while engaged -> deviation flagged: {world.deviation_flagged}")
