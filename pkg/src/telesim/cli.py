"""telesim command line: run headless trials, serve the live gateway, analyze logs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .gateway import ScriptedOperator, run_trial
from .gateway import scripts as script_builders
from .logs import record_log, replay_log
from .metrics import DISPERSION_MODES, STD, build_report, render_report, save_report
from .resources import resolve_coupling, resolve_model, resolve_scenario

OPERATORS = {
    "nominal": lambda spec, model, seed: script_builders.nominal_script(spec, seed=seed),
    "fail-force-limit": lambda spec, model, seed: script_builders.force_limit_failure_script(spec, seed=seed),
    "fail-first-grasp": lambda spec, model, seed: script_builders.first_grasp_miss_script(spec, seed=seed),
    "fail-grasp-loss": lambda spec, model, seed: script_builders.grasp_loss_failure_script(spec, seed=seed),
    "fail-suction-tilt": lambda spec, model, seed: script_builders.suction_tilt_failure_script(spec, model, seed=seed),
    "fail-path-deviation": lambda spec, model, seed: script_builders.path_deviation_failure_script(spec, seed=seed),
    "fail-incomplete-cut": lambda spec, model, seed: script_builders.incomplete_cut_failure_script(spec, seed=seed),
}


def _cmd_run(args) -> int:
    scenario = resolve_scenario(args.scenario)
    coupling = resolve_coupling(args.coupling)
    model = resolve_model(args.model)
    if args.operator == "remote":
        print("remote operators connect through `telesim serve`", file=sys.stderr)
        return 2
    if args.operator not in OPERATORS:
        print(f"unknown operator {args.operator!r}; choose from {sorted(OPERATORS)}", file=sys.stderr)
        return 2
    script = OPERATORS[args.operator](scenario, model, args.seed)
    operator = ScriptedOperator(script, coupling, model, scenario.home_q)
    log = run_trial(
        scenario,
        coupling,
        operator,
        rate=args.rate,
        max_duration=args.max_duration,
        model=model,
        trial_id=args.trial_id,
        seed=args.seed,
    )
    outcome = log.outcome
    print(
        f"{scenario.name} [{coupling.name}] -> "
        f"{'success' if outcome.success else 'failure'} ({outcome.reason}) in {outcome.time_s:.1f} s"
    )
    if args.out:
        record_log(log, args.out)
        print(f"log written to {args.out}")
    return 0 if outcome.success or args.operator != "nominal" else 1


def _cmd_serve(args) -> int:
    from .gateway.server import TelesimServer

    server = TelesimServer(
        host=args.host,
        port=args.port,
        scenario=args.scenario,
        coupling=args.coupling,
        rate=args.rate,
        record_dir=args.record_dir,
        model=resolve_model(args.model),
    )
    print(f"telesim gateway on ws://{args.host}:{args.port} "
          f"(scenario {args.scenario}, coupling {args.coupling})")
    try:
        server.run_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_analyze(args) -> int:
    logs = [replay_log(Path(p)) for p in args.logs]
    report = build_report(logs, dispersion_mode=args.dispersion_mode)
    print(render_report(report))
    if args.report_out:
        save_report(report, args.report_out)
        print(f"report written to {args.report_out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="telesim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one headless scripted trial")
    run_p.add_argument("--scenario", required=True, help="bundled name or YAML path")
    run_p.add_argument("--coupling", default="haptic-cartesian", help="profile name or YAML path")
    run_p.add_argument("--operator", default="nominal", help="script name or 'remote'")
    run_p.add_argument("--model", default="slave-7dof")
    run_p.add_argument("--rate", type=float, default=1000.0, help="control rate, Hz")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--max-duration", type=float, default=180.0)
    run_p.add_argument("--trial-id", default="cli-trial")
    run_p.add_argument("--out", default=None, help="write the trial log here (JSONL)")
    run_p.set_defaults(fn=_cmd_run)

    serve_p = sub.add_parser("serve", help="serve the interactive gateway")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8765)
    serve_p.add_argument("--scenario", default="case1-unbolting")
    serve_p.add_argument("--coupling", default="haptic-cartesian")
    serve_p.add_argument("--model", default="slave-7dof")
    serve_p.add_argument("--rate", type=float, default=500.0)
    serve_p.add_argument("--record-dir", default=None, help="write trial logs here")
    serve_p.set_defaults(fn=_cmd_serve)

    an_p = sub.add_parser("analyze", help="aggregate trial logs into a comparison report")
    an_p.add_argument("logs", nargs="+", help="trial log files")
    an_p.add_argument("--dispersion-mode", choices=DISPERSION_MODES, default=STD)
    an_p.add_argument("--report-out", default=None, help="write the structured report here (JSON)")
    an_p.set_defaults(fn=_cmd_analyze)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
