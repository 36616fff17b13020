"""Headless trials end to end, plus a force-trace figure.

Runs the cover-removal scenario on both platforms with the scripted
operator, records the logs, and plots the slave force traces with stage
shading (written to demos/out/).
"""

from pathlib import Path

import numpy as np

from telesim.coupling import haptic_cartesian_profile, twin_joint_profile
from telesim.dynamics import slave_7dof
from telesim.gateway import ScriptedOperator, nominal_script, run_trial
from telesim.logs import record_log
from telesim.metrics import segment_stages
from telesim.tasks import cover_removal_scenario

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

model = slave_7dof()
logs = {}
for label, coupling in (("haptic", haptic_cartesian_profile()), ("twin", twin_joint_profile())):
    spec = cover_removal_scenario()
    operator = ScriptedOperator(nominal_script(spec, seed=4), coupling, model, spec.home_q)
    log = run_trial(spec, coupling, operator, rate=500.0, max_duration=40.0,
                    trial_id=f"demo-{label}", seed=4)
    path = OUT / f"cover-{label}.jsonl"
    record_log(log, path)
    logs[label] = (spec, log)
    print(f"{label:7s}: {log.outcome.reason} in {log.outcome.time_s:.1f} s -> {path}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping the figure")
    raise SystemExit(0)

STAGE_COLORS = {"coarse": "#d9e7f5", "fine": "#d5efd5", "action": "#f7e8b0", "place": "#f5d2d2"}

fig, axes = plt.subplots(2, 1, figsize=(9, 6), sharex=True)
for ax, (label, (spec, log)) in zip(axes, logs.items()):
    t = np.array([s.t for s in log.samples])
    f = np.array([s.f_ext_force for s in log.samples])
    for interval in segment_stages(log, spec).intervals:
        ax.axvspan(interval.start, interval.end,
                   color=STAGE_COLORS[interval.stage], alpha=0.8, lw=0)
    for k, axis_name in enumerate("xyz"):
        ax.plot(t, f[:, k], label=f"F{axis_name}")
    ax.set_ylabel(f"{label} force [N]")
    ax.legend(loc="upper right", fontsize=8)
axes[-1].set_xlabel("time [s]")
fig.suptitle("Cover removal: slave end-effector forces with stage shading")
fig.tight_layout()
figure_path = OUT / "cover-forces.png"
fig.savefig(figure_path, dpi=120)
print(f"figure -> {figure_path}")
