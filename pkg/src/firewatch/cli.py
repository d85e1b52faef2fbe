"""Operator command line: train agents, run scenarios, analyze traces.

Exit codes: 0 success, 1 runtime failure, 2 usage or config errors.
Every command is deterministic under --simulated with a fixed seed.
"""

from __future__ import annotations

import argparse
import json
import os
import queue as queue_mod
import sys
from pathlib import Path

from firewatch import report
from firewatch.clock import SimClock, WallClock
from firewatch.dqn import (
    TrainerConfig,
    run_training,
    save_checkpoint,
    write_metrics_csv,
)
from firewatch.env import SectorEnv
from firewatch.gateway import (
    GatewayPolicy,
    MemorySink,
    WebhookSink,
    load_policy,
    run_pipeline,
)
from firewatch.report import TraceError
from firewatch.scenarios import wheelbarrow_policy, wheelbarrow_scenario
from firewatch.service import RecordStore, TelemetryService
from firewatch.simulate import ScenarioError, load_scenario, save_scenario
from firewatch.verify import (
    MockVerifier,
    RemoteVerifier,
    SceneVerifier,
    VerifierVerdict,
)
from firewatch.vision import synth_video, write_frames

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class ConfigError(Exception):
    pass


def _load_json(path: str, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} {path}: line {e.lineno}: {e.msg}") from e


def cmd_train(args) -> int:
    doc = _load_json(args.config, "training config") if args.config else {}
    trainer_doc = dict(doc.get("trainer", {}))
    if args.episodes is not None:
        trainer_doc["episodes"] = args.episodes
    if args.seed is not None:
        trainer_doc["seed"] = args.seed
    try:
        config = TrainerConfig.from_dict(trainer_doc)
        env = SectorEnv(**doc.get("env", {}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad training config: {e}") from e

    net, metrics = run_training(env, config)
    save_checkpoint(net, args.out)
    if args.metrics:
        write_metrics_csv(metrics, args.metrics)
    final = metrics.moving_avg[-1] if metrics.moving_avg else 0.0
    print(f"trained {config.episodes} episodes; "
          f"final {min(100, max(1, len(metrics.moving_avg)))}-episode moving average: "
          f"{final:.3f} total reward/episode "
          f"({final / config.steps_per_episode:.3f} per step)")
    print(f"checkpoint written to {args.out}")
    return 0


def _build_verifier(spec: str, latency_ms: int):
    if spec == "scene":
        return SceneVerifier(latency_ms=latency_ms)
    if spec == "always":
        return MockVerifier(VerifierVerdict.uniform(True), latency_ms=latency_ms)
    if spec == "never":
        return MockVerifier(VerifierVerdict.uniform(False), latency_ms=latency_ms)
    if spec.startswith("remote:"):
        return RemoteVerifier(spec.split(":", 1)[1])
    raise ConfigError(f"unknown verifier {spec!r}; use scene, always, never, or remote:URL")


def cmd_run(args) -> int:
    try:
        script = load_scenario(args.scenario)
    except ScenarioError as e:
        raise ConfigError(str(e)) from e
    policy = GatewayPolicy.from_dict(_load_json(args.policy, "policy config")) \
        if args.policy else wheelbarrow_policy()
    verifier = _build_verifier(args.verifier, policy.verification_ms)
    sink = WebhookSink(args.webhook) if args.webhook else MemorySink()

    service = None
    publish = None
    control_queue = None
    if args.serve:
        store = RecordStore(args.store)
        control_queue = queue_mod.Queue() if args.live else None
        service = TelemetryService(store, port=args.port, control_queue=control_queue)
        service.start()
        print(f"telemetry service listening on {service.url}")
        publish = lambda kind, body: store.append(kind, body)

    clock = WallClock() if args.live else SimClock()
    try:
        result = run_pipeline(script, policy, verifier, sink=sink, clock=clock,
                              publish=publish, control_queue=control_queue)
    finally:
        if service is not None:
            service.stop()

    Path(args.trace).write_text("\n".join(result.trace_lines) + "\n", encoding="utf-8")
    records = report.parse_trace(result.trace_lines)
    labels = {p.node.id: p.node.label for p in script.placements}
    rows = report.summary_rows(records, labels=labels)
    text = report.format_summary_text(rows)
    print(f"{len(result.alerts)} alert(s); detection times by node (seconds):")
    print(text, end="")
    if args.summary:
        Path(args.summary + ".txt").write_text(text, encoding="utf-8")
        Path(args.summary + ".csv").write_text(report.format_summary_csv(rows),
                                               encoding="utf-8")
    return 0


def cmd_replay(args) -> int:
    path = Path(args.trace)
    if not path.exists():
        raise ConfigError(f"trace log not found: {args.trace}")
    try:
        records = report.load_trace(path)
        report.check_ordering(records)
    except TraceError as e:
        print(f"trace invalid: {e}", file=sys.stderr)
        return RUNTIME_ERROR
    breakdowns = report.alert_breakdowns(records)
    if not breakdowns:
        print("no alerts in trace")
        return 0
    print(f"{'alert':<10} {'node':>4} {'orient_s':>9} {'verify_s':>9} "
          f"{'dispatch_s':>10} {'total_s':>8}")
    for b in breakdowns:
        assert b.stages_sum_ms == b.total_ms
        print(f"{b.alert_id:<10} {b.node:>4} {b.orientation_ms / 1000:>9.2f} "
              f"{b.verification_ms / 1000:>9.2f} {b.dispatch_ms / 1000:>10.2f} "
              f"{b.total_ms / 1000:>8.2f}")
    return 0


def cmd_gen_video(args) -> int:
    spec = _load_json(args.spec, "video spec")
    try:
        frames = synth_video(spec)
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad video spec: {e}") from e
    write_frames(args.out, frames)
    print(f"wrote {len(frames)} frame(s) to {args.out}")
    return 0


def cmd_gen_scenario(args) -> int:
    if args.kind != "wheelbarrow":
        raise ConfigError(f"unknown scenario kind {args.kind!r}")
    script = wheelbarrow_scenario(trials_per_node=args.trials, seed=args.seed)
    save_scenario(script, args.out)
    print(f"wrote {args.kind} scenario ({args.trials} trials/node) to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firewatch",
        description="Deterministic wildfire-monitoring control plane.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the sector-selection agent")
    p.add_argument("--config", help="JSON config with trainer/env sections")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--metrics", help="metrics CSV output path")
    p.add_argument("--episodes", type=int, help="override episode count")
    p.add_argument("--seed", type=int, help="override RNG seed")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("run", help="run a scenario through the gateway pipeline")
    p.add_argument("--scenario", required=True, help="scenario script path")
    p.add_argument("--policy", help="gateway policy JSON (default: field-test policy)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--simulated", action="store_true", default=True,
                      help="run on the simulated clock (default)")
    mode.add_argument("--live", action="store_true",
                      help="run on the wall clock, enabling the control endpoint")
    p.add_argument("--serve", action="store_true",
                   help="start the telemetry service and publish records to it")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("FIREWATCH_PORT", "8787")),
                   help="service port with --serve (env: FIREWATCH_PORT)")
    p.add_argument("--store", help="service store file (default: in-memory)")
    p.add_argument("--verifier", default="scene",
                   help="scene | always | never | remote:URL")
    p.add_argument("--webhook", help="alert webhook URL (default: in-memory sink)")
    p.add_argument("--trace", default="trace.jsonl", help="trace log output path")
    p.add_argument("--summary", help="summary output prefix (.txt and .csv)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="recompute latency breakdowns from a trace log")
    p.add_argument("--trace", required=True, help="trace log path")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("gen-video", help="generate synthetic raw frame sequences")
    p.add_argument("--spec", required=True, help="video spec JSON path")
    p.add_argument("--out", required=True, help="output frames file")
    p.set_defaults(func=cmd_gen_video)

    p = sub.add_parser("gen-scenario", help="write a canned scenario script")
    p.add_argument("--kind", default="wheelbarrow")
    p.add_argument("--trials", type=int, default=5, help="trials per node")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--out", required=True, help="scenario output path")
    p.set_defaults(func=cmd_gen_scenario)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except KeyboardInterrupt:
        return RUNTIME_ERROR
    except Exception as e:
        print(f"runtime error: {e}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
