"""Timing analytics: effect sizes from published-style rows and from logs.

First reproduces a set of per-task effect sizes from (mean, +/-, n) rows
under the standard-error reading of the +/- column, then builds a live
comparison report from freshly simulated trials.
"""

import numpy as np

from telesim.coupling import haptic_cartesian_profile, twin_joint_profile
from telesim.dynamics import slave_7dof
from telesim.gateway import ScriptedOperator, nominal_script, run_trial
from telesim.metrics import (
    SEM_TIMES_SQRT_N,
    STD,
    build_report,
    from_reported,
    percent_reduction,
    render_report,
    smd,
)
from telesim.tasks import sorting_scenario

# published-style timing rows: task -> (mean_h, pm_h, mean_f, pm_f), n = 5
ROWS = {
    "unbolting": (188.0, 23.0, 124.0, 13.0),
    "bolt_removal": (713.0, 89.0, 410.0, 63.0),
    "cover_removal": (101.0, 15.0, 70.0, 6.0),
    "sorting": (179.0, 19.0, 77.0, 5.0),
    "cutting": (122.0, 26.0, 95.0, 18.0),
}

print(f"{'task':<14}{'SMD (sem*sqrt(n))':>18}{'SMD (std)':>12}{'reduction':>11}")
for task, (mh, ph, mf, pf) in ROWS.items():
    h, f = from_reported(mh, ph, 5), from_reported(mf, pf, 5)
    print(f"{task:<14}{smd(h, f, SEM_TIMES_SQRT_N):>18.2f}{smd(h, f, STD):>12.2f}"
          f"{percent_reduction(mh, mf):>10.1f}%")

# --- a small live comparison: sorting on both platforms ----------------------------
model = slave_7dof()
trials = []
for platform, coupling in (("haptic", haptic_cartesian_profile()), ("twin", twin_joint_profile())):
    for seed in (1, 2, 3):
        spec = sorting_scenario()
        operator = ScriptedOperator(nominal_script(spec, seed=seed), coupling, model, spec.home_q)
        # per-seed jitter stands in for operator variability
        operator.script.noise_sigma = 2e-5
        trials.append(
            run_trial(spec, coupling, operator, rate=500.0, max_duration=60.0,
                      trial_id=f"{platform}-{seed}", seed=seed)
        )
print("\nsimulated sorting comparison (3 trials per platform):")
print(render_report(build_report(trials, dispersion_mode=STD)))
