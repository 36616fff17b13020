"""Trial analytics: stage segmentation, timing statistics and effect sizes.

Completion times are compared between the two platforms with the
standardized mean difference

    SMD = (mean_h - mean_f) / sqrt(sigma_h^2 + sigma_f^2)

where |SMD| >= 0.8 reads as a significant effect. Published tables often
report "mean +/- x" without defining x; ``dispersion_mode`` picks the
interpretation of the stored dispersion: "std" uses it as a standard
deviation directly, "sem_times_sqrt_n" treats it as a standard error and
rescales by sqrt(n). For stats computed from raw times with
``completion_stats`` the stored value is a true standard deviation, so
"std" is the faithful mode there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegenerateDispersionError,
    EmptyInputError,
)
from .logs import TrialLog
from .tasks.world import BOLT_REMOVAL, COVER_REMOVAL, CUTTING, SORTING, TASK_KINDS, UNBOLTING, TaskSpec

COARSE = "coarse"
FINE = "fine"
ACTION = "action"
PLACE = "place"

STD = "std"
SEM_TIMES_SQRT_N = "sem_times_sqrt_n"
DISPERSION_MODES = (STD, SEM_TIMES_SQRT_N)

FINE_DISTANCE = 0.05  # m, tool-to-target threshold between coarse and fine
ACTION_FORCE_THRESHOLD = 2.0  # N, grasp-task action onset
ACTION_FORCE_SUSTAIN = 0.1  # s the force must stay above threshold

GRASP_TASKS = (BOLT_REMOVAL, COVER_REMOVAL, SORTING)

_LEGAL_TRANSITIONS = {
    (COARSE, FINE),
    (FINE, COARSE),
    (FINE, ACTION),
    (COARSE, ACTION),
    (ACTION, FINE),
    (ACTION, COARSE),
    (ACTION, PLACE),
    (FINE, PLACE),  # a gentle grasp can succeed with no measurable force crossing
    (PLACE, COARSE),
    (PLACE, FINE),
}


@dataclass(frozen=True)
class StageInterval:
    stage: str
    start: float
    end: float


@dataclass
class StageAnnotation:
    intervals: list[StageInterval] = field(default_factory=list)

    def validate(self, t_start: float, t_end: float, grasp_task: bool) -> None:
        if not self.intervals:
            raise ContractViolationError("empty stage annotation")
        if not math.isclose(self.intervals[0].start, t_start, abs_tol=1e-9):
            raise ContractViolationError("annotation does not start at trial start")
        if not math.isclose(self.intervals[-1].end, t_end, abs_tol=1e-9):
            raise ContractViolationError("annotation does not end at trial end")
        for a, b in zip(self.intervals, self.intervals[1:]):
            if not math.isclose(a.end, b.start, abs_tol=1e-9):
                raise ContractViolationError(f"gap or overlap at t={a.end}")
            if (a.stage, b.stage) not in _LEGAL_TRANSITIONS:
                raise ContractViolationError(f"illegal transition {a.stage} -> {b.stage}")
        if not grasp_task and any(i.stage == PLACE for i in self.intervals):
            raise ContractViolationError("place stage only applies to grasping tasks")

    def total(self) -> float:
        return sum(i.end - i.start for i in self.intervals)

    def time_in(self, stage: str) -> float:
        return sum(i.end - i.start for i in self.intervals if i.stage == stage)


def _sustained_force_runs(samples, threshold: float, sustain: float) -> list[tuple[float, float]]:
    runs = []
    start = None
    prev_t = None
    for s in samples:
        above = float(np.linalg.norm(s.f_ext_force)) >= threshold
        if above and start is None:
            start = s.t
        elif not above and start is not None:
            if prev_t is not None and prev_t - start >= sustain:
                runs.append((start, prev_t))
            start = None
        prev_t = s.t
    if start is not None and prev_t is not None and prev_t - start >= sustain:
        runs.append((start, prev_t))
    return runs


def _action_anchors(log: TrialLog, spec: TaskSpec) -> list[tuple[float, float, str]]:
    """(start, end, stage) spans for action and place phases."""
    anchors: list[tuple[float, float, str]] = []
    t_end = log.t_end
    if spec.kind in (UNBOLTING, CUTTING):
        start = None
        for e in log.events:
            if e.kind == "spindle_on" and start is None:
                start = e.t
            elif e.kind == "spindle_off" and start is not None:
                anchors.append((start, e.t, ACTION))
                start = None
        if start is not None:
            anchors.append((start, t_end, ACTION))
        return anchors

    runs = _sustained_force_runs(log.samples, ACTION_FORCE_THRESHOLD, ACTION_FORCE_SUSTAIN)
    for e in log.events:
        if e.kind in ("grasp", "engage"):
            onset = e.t
            for run_start, run_end in runs:
                if run_start <= e.t and run_end >= e.t - 0.2:
                    onset = min(run_start, onset)
            if onset < e.t:
                anchors.append((onset, e.t, ACTION))
            release_t = t_end
            for other in log.events:
                if other.kind in ("release", "detach") and other.t > e.t:
                    release_t = other.t
                    break
            anchors.append((e.t, release_t, PLACE))
    return anchors


def segment_stages(log: TrialLog, spec: TaskSpec) -> StageAnnotation:
    """Partition an ended trial into coarse/fine/action/place intervals.

    Coarse holds while the tool is more than 5 cm from the current target,
    fine inside that radius; the action span is anchored on task triggers
    (spindle for unbolting/cutting, sustained-force onset to grasp/engage
    for grasping tasks); place runs from a successful grasp to release and
    then reverts to coarse.
    """
    if not log.ended:
        raise ContractViolationError("trial has not ended")
    if spec.kind != log.task:
        raise ConfigurationError(f"spec is for {spec.kind!r}, log is for {log.task!r}")
    if not spec.targets:
        raise ConfigurationError("task spec has no targets")
    if not log.samples:
        raise ContractViolationError("log has no samples")

    samples = log.samples
    t0, t_end = samples[0].t, samples[-1].t
    anchors = [(max(s, t0), min(e, t_end), k) for s, e, k in _action_anchors(log, spec) if e > s]
    rep_times = sorted(e.t for e in log.events if e.kind in ("rep_success", "rep_failure"))

    def anchor_at(t: float):
        for s, e, k in anchors:
            if s <= t < e:
                return k
        return None

    def distance_stage(t: float) -> str:
        idx = 0
        while idx < len(samples) - 1 and samples[idx + 1].t <= t:
            idx += 1
        reps_done = sum(1 for rt in rep_times if rt <= t)
        target = spec.targets[min(reps_done, len(spec.targets) - 1)]
        pos = np.asarray(samples[idx].x_f_translation)
        dist = float(np.linalg.norm(pos - target.translation))
        return COARSE if dist > FINE_DISTANCE else FINE

    boundaries = {t0, t_end}
    boundaries.update(s.t for s in samples)
    for s, e, _ in anchors:
        boundaries.update((s, e))
    boundaries.update(rep_times)
    cuts = sorted(b for b in boundaries if t0 <= b <= t_end)

    intervals: list[StageInterval] = []
    for a, b in zip(cuts, cuts[1:]):
        stage = anchor_at(a) or distance_stage(a)
        if intervals and intervals[-1].stage == stage:
            intervals[-1] = StageInterval(stage, intervals[-1].start, b)
        else:
            intervals.append(StageInterval(stage, a, b))
    if not intervals:
        intervals = [StageInterval(distance_stage(t0), t0, t_end)]
    annotation = StageAnnotation(intervals=intervals)
    annotation.validate(t0, t_end, grasp_task=spec.kind in GRASP_TASKS)
    return annotation


# --- timing statistics ----------------------------------------------------------

@dataclass(frozen=True)
class CompletionStats:
    n: int
    mean: float
    std: float
    sem: float
    degenerate: bool = False  # n == 1, dispersion zero by convention

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolationError("n must be >= 1")
        if self.std < 0:
            raise ContractViolationError("std must be non-negative")
        if abs(self.sem - self.std / math.sqrt(self.n)) > 1e-12 * max(1.0, self.std):
            raise ContractViolationError("sem must equal std / sqrt(n)")


def completion_stats(times) -> CompletionStats:
    """Sample mean, n-1 standard deviation and standard error of times (s)."""
    values = [float(t) for t in times]
    if not values:
        raise EmptyInputError("no completion times")
    if any(not math.isfinite(v) or v <= 0 for v in values):
        raise ContractViolationError("completion times must be finite and positive")
    n = len(values)
    mean = sum(values) / n
    if n == 1:
        return CompletionStats(n=1, mean=mean, std=0.0, sem=0.0, degenerate=True)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    std = math.sqrt(var)
    return CompletionStats(n=n, mean=mean, std=std, sem=std / math.sqrt(n))


def from_reported(mean: float, plus_minus: float, n: int) -> CompletionStats:
    """Stats carrying a published "mean +/- x" pair; x is stored as std."""
    pm = float(plus_minus)
    return CompletionStats(n=int(n), mean=float(mean), std=pm, sem=pm / math.sqrt(n))


def smd(h: CompletionStats, f: CompletionStats, dispersion_mode: str) -> float:
    """Standardized mean difference; positive when the first platform is slower.

    dispersion_mode "std" uses the stored dispersion as sigma directly;
    "sem_times_sqrt_n" treats it as a standard error and uses sigma =
    dispersion * sqrt(n).
    """
    if dispersion_mode not in DISPERSION_MODES:
        raise ConfigurationError(f"unknown dispersion mode {dispersion_mode!r}")
    if dispersion_mode == STD:
        sig_h, sig_f = h.std, f.std
    else:
        sig_h, sig_f = h.std * math.sqrt(h.n), f.std * math.sqrt(f.n)
    denom = math.sqrt(sig_h**2 + sig_f**2)
    if denom == 0.0:
        raise DegenerateDispersionError("both dispersions are zero")
    return (h.mean - f.mean) / denom


def percent_reduction(mean_h: float, mean_f: float) -> float:
    """Relative time saving of the second platform over the first, percent."""
    if not mean_h > 0:
        raise ContractViolationError("baseline mean must be positive")
    return 100.0 * (mean_h - mean_f) / mean_h


# --- reports ----------------------------------------------------------------------

@dataclass
class PlatformSummary:
    trials: int
    rep_successes: int
    rep_attempts: int
    success_rate: float  # percent, per repetition unit
    stats: CompletionStats | None
    times_from_failures: bool = False  # no successful trial; stats over attempts


@dataclass
class TaskComparison:
    task: str
    haptic: PlatformSummary | None = None
    twin: PlatformSummary | None = None
    smd: float | None = None
    percent_reduction: float | None = None


@dataclass
class MetricsReport:
    dispersion_mode: str
    tasks: dict[str, TaskComparison] = field(default_factory=dict)


def _platform_summary(trials: list[TrialLog]) -> PlatformSummary:
    successes = sum(len(t.events_of("rep_success")) for t in trials)
    failures = sum(len(t.events_of("rep_failure")) for t in trials)
    attempts = successes + failures
    rate = 100.0 * successes / attempts if attempts else 0.0
    times = [t.outcome.time_s for t in trials if t.outcome is not None and t.outcome.success]
    fallback = False
    if not times:
        times = [t.outcome.time_s for t in trials if t.outcome is not None and t.outcome.time_s > 0]
        fallback = True
    stats = completion_stats(times) if times else None
    return PlatformSummary(
        trials=len(trials),
        rep_successes=successes,
        rep_attempts=attempts,
        success_rate=rate,
        stats=stats,
        times_from_failures=fallback and stats is not None,
    )


def build_report(trials: list[TrialLog], dispersion_mode: str = STD) -> MetricsReport:
    """Aggregate ended trials into a per-task platform comparison.

    Success rates are per repetition unit (per bolt, per module), matching
    how multi-repetition tasks are scored. Completion statistics cover
    successful trials, falling back to attempted durations (flagged) when a
    platform never succeeded.
    """
    ended = [t for t in trials if t.ended]
    if not ended:
        raise EmptyInputError("no ended trials to report on")
    report = MetricsReport(dispersion_mode=dispersion_mode)
    for task in TASK_KINDS:
        group = [t for t in ended if t.task == task]
        if not group:
            continue
        comparison = TaskComparison(task=task)
        for platform in ("haptic", "twin"):
            sub = [t for t in group if t.platform == platform]
            if sub:
                summary = _platform_summary(sub)
                setattr(comparison, platform, summary)
        if (
            comparison.haptic is not None
            and comparison.twin is not None
            and comparison.haptic.stats is not None
            and comparison.twin.stats is not None
        ):
            try:
                comparison.smd = smd(comparison.haptic.stats, comparison.twin.stats, dispersion_mode)
            except DegenerateDispersionError:
                comparison.smd = None
            comparison.percent_reduction = percent_reduction(
                comparison.haptic.stats.mean, comparison.twin.stats.mean
            )
        report.tasks[task] = comparison
    return report


def _stats_tree(stats: CompletionStats | None):
    if stats is None:
        return None
    return {
        "n": stats.n,
        "mean": stats.mean,
        "std": stats.std,
        "sem": stats.sem,
        "degenerate": stats.degenerate,
    }


def _summary_tree(summary: PlatformSummary | None):
    if summary is None:
        return None
    return {
        "trials": summary.trials,
        "rep_successes": summary.rep_successes,
        "rep_attempts": summary.rep_attempts,
        "success_rate": summary.success_rate,
        "stats": _stats_tree(summary.stats),
        "times_from_failures": summary.times_from_failures,
    }


def report_to_tree(report: MetricsReport) -> dict:
    return {
        "dispersion_mode": report.dispersion_mode,
        "tasks": {
            task: {
                "haptic": _summary_tree(c.haptic),
                "twin": _summary_tree(c.twin),
                "smd": c.smd,
                "percent_reduction": c.percent_reduction,
            }
            for task, c in report.tasks.items()
        },
    }


def _stats_from_tree(node) -> CompletionStats | None:
    if node is None:
        return None
    return CompletionStats(
        n=node["n"], mean=node["mean"], std=node["std"], sem=node["sem"],
        degenerate=node.get("degenerate", False),
    )


def _summary_from_tree(node) -> PlatformSummary | None:
    if node is None:
        return None
    return PlatformSummary(
        trials=node["trials"],
        rep_successes=node["rep_successes"],
        rep_attempts=node["rep_attempts"],
        success_rate=node["success_rate"],
        stats=_stats_from_tree(node["stats"]),
        times_from_failures=node.get("times_from_failures", False),
    )


def report_from_tree(tree: dict) -> MetricsReport:
    report = MetricsReport(dispersion_mode=tree["dispersion_mode"])
    for task, node in tree["tasks"].items():
        report.tasks[task] = TaskComparison(
            task=task,
            haptic=_summary_from_tree(node["haptic"]),
            twin=_summary_from_tree(node["twin"]),
            smd=node["smd"],
            percent_reduction=node["percent_reduction"],
        )
    return report


def save_report(report: MetricsReport, path) -> None:
    Path(path).write_text(json.dumps(report_to_tree(report), indent=2, sort_keys=True) + "\n")


def load_report(path) -> MetricsReport:
    return report_from_tree(json.loads(Path(path).read_text()))


def render_report(report: MetricsReport) -> str:
    """Text table with per-platform success rate and timing, SMD and reduction."""
    header = (
        f"{'Task':<18}{'H succ%':>8}{'H time [s]':>16}{'F succ%':>8}"
        f"{'F time [s]':>16}{'SMD':>8}{'Red%':>8}"
    )
    lines = [header, "-" * len(header)]

    def time_cell(summary: PlatformSummary | None) -> str:
        if summary is None or summary.stats is None:
            return "-"
        flag = "*" if summary.times_from_failures else ""
        return f"{summary.stats.mean:.0f} +/- {summary.stats.std:.0f}{flag}"

    def rate_cell(summary: PlatformSummary | None) -> str:
        return "-" if summary is None else f"{summary.success_rate:.0f}"

    for task, c in report.tasks.items():
        smd_cell = "-" if c.smd is None else f"{c.smd:.2f}"
        red_cell = "-" if c.percent_reduction is None else f"{c.percent_reduction:.1f}"
        lines.append(
            f"{task:<18}{rate_cell(c.haptic):>8}{time_cell(c.haptic):>16}"
            f"{rate_cell(c.twin):>8}{time_cell(c.twin):>16}{smd_cell:>8}{red_cell:>8}"
        )
    lines.append(f"(dispersion mode: {report.dispersion_mode}; * stats over attempted durations)")
    return "\n".join(lines)
