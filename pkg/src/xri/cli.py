"""The ``xri`` command line: broker, scenario runner, inject, tap, bridge, bench.

Exit codes: 0 success, 2 environment (bind/port), 3 bad input (config,
script, payload, filter), 4 broker unreachable. Machine-readable output goes
to stdout as JSON lines; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from xri.agents.clock import ClockMode, LogicalClock
from xri.agents.machine import ConfigError
from xri.agents.scenario import ScenarioConfig, run_scenario
from xri.bridge.server import Bridge
from xri.context.detectors import DetectorConfig
from xri.context.pipeline import PipelineError, ScriptError, SensorScript, run_pipeline
from xri.core.events import SchemaError, encode_clock, payload_to_json
from xri.core.schema import CLOCK_TOPIC
from xri.fabric.broker import Broker, BrokerConfig
from xri.fabric.client import Client, ClientError, ConnectionLostError
from xri.fabric.topics import TopicError, TopicFilter, TopicName

EXIT_OK = 0
EXIT_ENV = 2
EXIT_INPUT = 3
EXIT_CONN = 4

DEFAULT_BROKER = "127.0.0.1:1883"


def _err(message: str) -> None:
    print(f"xri: {message}", file=sys.stderr)


def _default_broker() -> str:
    return os.environ.get("XRI_BROKER", DEFAULT_BROKER)


def _split_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    return host or "127.0.0.1", int(port)


def _parse_interval(value: str) -> float:
    return float(value[:-1]) if value.endswith("s") else float(value)


def _connect(address: str, client_id: str, keepalive: int = 30) -> Client:
    client = Client(client_id, keepalive=keepalive)
    client.connect(address)
    return client


# -- subcommands ---------------------------------------------------------------


def cmd_broker(args) -> int:
    try:
        host, port = _split_listen(args.listen)
    except ValueError:
        _err(f"invalid listen address {args.listen!r}")
        return EXIT_INPUT
    config = BrokerConfig()
    if args.max_sessions:
        config.max_sessions = args.max_sessions
    broker = Broker(host=host, port=port, config=config)
    try:
        broker.start()
    except OSError as exc:
        _err(f"cannot bind {args.listen}: {exc}")
        return EXIT_ENV
    _err(f"broker listening on {broker.address}")
    interval = _parse_interval(args.metrics_interval) if args.metrics_interval else None
    try:
        next_report = time.monotonic() + (interval or 0)
        while True:
            time.sleep(0.2)
            if interval and time.monotonic() >= next_report:
                print(json.dumps(broker.metrics(), separators=(",", ":")), flush=True)
                next_report += interval
    except KeyboardInterrupt:
        pass
    finally:
        metrics = broker.metrics()
        broker.stop()
        print(json.dumps(metrics, separators=(",", ":")), flush=True)
    return EXIT_OK


def _demo_path(name: str):
    from xri import demo

    return {"scenario": demo.scenario_path(), "script": demo.script_path()}[name]


def cmd_run(args) -> int:
    scenario_path = _demo_path("scenario") if args.scenario == "demo" else args.scenario
    script_path = _demo_path("script") if args.script == "demo" else args.script
    try:
        config = ScenarioConfig.load(scenario_path)
    except FileNotFoundError:
        _err(f"scenario file not found: {scenario_path}")
        return EXIT_INPUT
    except ConfigError as exc:
        _err(f"scenario config: {exc}")
        return EXIT_INPUT
    try:
        script = SensorScript.load(script_path)
    except FileNotFoundError:
        _err(f"script file not found: {script_path}")
        return EXIT_INPUT
    except ScriptError as exc:
        _err(f"sensor script: {exc}")
        return EXIT_INPUT

    embedded = None
    if args.embedded:
        embedded = Broker(port=0)
        try:
            embedded.start()
        except OSError as exc:
            _err(f"cannot start embedded broker: {exc}")
            return EXIT_ENV
        address = embedded.address
    else:
        address = args.broker

    out = None
    try:
        try:
            scenario_client = _connect(address, "xri-scenario")
            pipeline_client = _connect(address, "xri-pipeline")
        except (OSError, ClientError) as exc:
            _err(f"broker {address} unreachable: {exc}")
            return EXIT_CONN

        out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
        clock = LogicalClock(ClockMode.SCRIPTED, speed=args.speed if args.speed else None)
        scenario = run_scenario(config, scenario_client, trace=out)
        try:
            published = run_pipeline(
                script, DetectorConfig(), pipeline_client, seed=args.seed, clock=clock
            )
        except (PipelineError, SchemaError) as exc:
            _err(f"pipeline failed: {exc}")
            return EXIT_CONN if isinstance(exc, PipelineError) else EXIT_INPUT
        pipeline_client.wait_for_acks(timeout=10.0)
        pipeline_client.publish(CLOCK_TOPIC, encode_clock(script.end_ts, end=True), qos=1)
        if not scenario.run_until_end(timeout=60.0):
            _err("scenario did not reach end of script")
            return EXIT_CONN
        scenario_client.wait_for_acks(timeout=10.0)
        _err(f"run complete: {published} context events, {scenario.steps} agent steps")
        pipeline_client.disconnect()
        scenario_client.disconnect()
        return EXIT_OK
    finally:
        if out is not None and out is not sys.stdout:
            out.close()
        if embedded is not None:
            embedded.stop()


def cmd_inject(args) -> int:
    try:
        TopicName(args.topic)
    except TopicError as exc:
        _err(str(exc))
        return EXIT_INPUT
    payload = args.payload.encode("utf-8")
    if not args.raw:
        from xri.bridge.server import _validate_upstream

        try:
            _validate_upstream(args.topic, payload)
        except SchemaError as exc:
            _err(f"payload rejected for {args.topic}: {exc} (use --raw to bypass)")
            return EXIT_INPUT
    try:
        client = _connect(args.broker, f"xri-inject-{os.getpid()}")
    except (OSError, ClientError) as exc:
        _err(f"broker {args.broker} unreachable: {exc}")
        return EXIT_CONN
    try:
        client.publish(args.topic, payload, qos=1, retain=args.retain)
    except ClientError as exc:
        _err(f"publish failed: {exc}")
        return EXIT_CONN
    finally:
        client.disconnect()
    return EXIT_OK


def cmd_tap(args) -> int:
    try:
        TopicFilter(args.filter)
    except TopicError as exc:
        _err(str(exc))
        return EXIT_INPUT
    try:
        client = _connect(args.broker, f"xri-tap-{os.getpid()}")
        client.subscribe(args.filter, qos=1)
    except (OSError, ClientError) as exc:
        _err(f"broker {args.broker} unreachable: {exc}")
        return EXIT_CONN
    deadline = time.monotonic() + args.duration if args.duration else None
    seen = 0
    try:
        while True:
            remaining = None
            if deadline is not None:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
            try:
                message = client.poll(timeout=min(remaining, 0.5) if remaining else 0.5)
            except ConnectionLostError:
                _err("connection to broker lost")
                return EXIT_CONN
            if message is None:
                continue
            print(
                json.dumps(
                    {
                        "topic": message.topic,
                        "payload": payload_to_json(message.payload),
                        "qos": message.qos,
                        "retain": message.retain,
                        "ts": int(time.time() * 1000),
                    },
                    separators=(",", ":"),
                    ensure_ascii=False,
                ),
                flush=True,
            )
            seen += 1
            if args.count and seen >= args.count:
                break
    except KeyboardInterrupt:
        pass
    finally:
        client.disconnect()
    return EXIT_OK


def cmd_bridge(args) -> int:
    try:
        ws_host, ws_port = _split_listen(args.ws)
    except ValueError:
        _err(f"invalid websocket address {args.ws!r}")
        return EXIT_INPUT
    bridge = Bridge(ws_host=ws_host, ws_port=ws_port, broker_address=args.broker)
    try:
        bridge.start()
    except (OSError, ClientError) as exc:
        _err(f"bridge failed to start: {exc}")
        return EXIT_CONN if isinstance(exc, ClientError) else EXIT_ENV
    _err(f"bridge serving {bridge.url} (broker {args.broker})")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        bridge.stop()
    return EXIT_OK


def cmd_bench(args) -> int:
    from xri import bench

    if args.kernels:
        print(json.dumps(bench.kernel_bench(), separators=(",", ":")), flush=True)
        return EXIT_OK
    try:
        report = bench.latency_bench(
            broker_address=None if args.embedded else args.broker,
            subscribers=args.subscribers,
            rate=args.rate,
            messages=args.messages,
            qos=args.qos,
        )
    except (OSError, ClientError) as exc:
        _err(f"bench failed: {exc}")
        return EXIT_CONN
    print(json.dumps(report, separators=(",", ":")), flush=True)
    return EXIT_OK


# -- argument wiring --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xri", description="Desk-scale XRI runtime: fabric, agents, dashboard plumbing."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_broker = sub.add_parser("broker", help="run the message-fabric broker")
    p_broker.add_argument("--listen", default="127.0.0.1:1883", help="host:port (default %(default)s)")
    p_broker.add_argument("--metrics-interval", default=None, help="e.g. 5s: print metrics JSON lines")
    p_broker.add_argument("--max-sessions", type=int, default=None)
    p_broker.set_defaults(func=cmd_broker)

    p_run = sub.add_parser("run", help="run a scenario against a sensor script")
    p_run.add_argument("--scenario", required=True, help="scenario JSON path, or 'demo'")
    p_run.add_argument("--script", required=True, help="sensor script JSONL path, or 'demo'")
    p_run.add_argument("--out", default=None, help="trace file (default stdout)")
    p_run.add_argument("--speed", type=float, default=0.0, help="pace script at N x real time (0 = as fast as possible)")
    p_run.add_argument("--seed", type=int, default=None, help="override the script's random seed")
    p_run.add_argument("--broker", default=_default_broker())
    p_run.add_argument("--embedded", action="store_true", help="run an in-process broker")
    p_run.set_defaults(func=cmd_run)

    p_inject = sub.add_parser("inject", help="publish one message")
    p_inject.add_argument("--broker", default=_default_broker())
    p_inject.add_argument("--topic", required=True)
    p_inject.add_argument("--payload", required=True, help="payload text (JSON for schema topics)")
    p_inject.add_argument("--retain", action="store_true")
    p_inject.add_argument("--raw", action="store_true", help="skip schema validation")
    p_inject.set_defaults(func=cmd_inject)

    p_tap = sub.add_parser("tap", help="stream matching messages as JSON lines")
    p_tap.add_argument("--broker", default=_default_broker())
    p_tap.add_argument("--filter", required=True)
    p_tap.add_argument("--count", type=int, default=None, help="exit after N messages")
    p_tap.add_argument("--duration", type=float, default=None, help="exit after N seconds")
    p_tap.set_defaults(func=cmd_tap)

    p_bridge = sub.add_parser("bridge", help="run the dashboard WebSocket bridge")
    p_bridge.add_argument("--ws", default="127.0.0.1:8080", help="websocket host:port")
    p_bridge.add_argument("--broker", default=_default_broker())
    p_bridge.set_defaults(func=cmd_bridge)

    p_bench = sub.add_parser("bench", help="latency benchmark (or --kernels)")
    p_bench.add_argument("--broker", default=_default_broker())
    p_bench.add_argument("--embedded", action="store_true", help="bench an in-process broker")
    p_bench.add_argument("--subscribers", type=int, default=10)
    p_bench.add_argument("--rate", type=float, default=1000.0)
    p_bench.add_argument("--messages", type=int, default=3000)
    p_bench.add_argument("--qos", type=int, default=1, choices=(0, 1))
    p_bench.add_argument("--kernels", action="store_true", help="compare compiled vs pure kernels")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
