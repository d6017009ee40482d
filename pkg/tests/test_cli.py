"""CLI exit-code contract and the machine-readable output surfaces."""

import json
import threading

import pytest

from xri import cli, demo
from xri.core.events import ContextEvent, EventKind, encode_event
from xri.core.schema import topic_for


def test_run_demo_embedded_exit_zero(tmp_path, capsys):
    out = tmp_path / "trace.jsonl"
    rc = cli.main(
        ["run", "--scenario", "demo", "--script", "demo", "--embedded", "--seed", "7", "--out", str(out)]
    )
    assert rc == 0
    lines = out.read_text().splitlines()
    assert all(json.loads(line) for line in lines)


def test_run_seed_determinism(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    assert cli.main(["run", "--scenario", "demo", "--script", "demo", "--embedded", "--seed", "7", "--out", str(a)]) == 0
    assert cli.main(["run", "--scenario", "demo", "--script", "demo", "--embedded", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_malformed_scenario_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    config = json.loads(demo.scenario_path().read_text())
    config["agents"][0]["initial"] = "Nonexistent"
    bad.write_text(json.dumps(config))
    rc = cli.main(["run", "--scenario", str(bad), "--script", "demo", "--embedded"])
    assert rc == 3
    err = capsys.readouterr().err
    assert "agents[0].initial" in err


def test_run_invalid_script_json_exit_3(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"ts": oops\n')
    rc = cli.main(["run", "--scenario", "demo", "--script", str(bad), "--embedded"])
    assert rc == 3
    assert "line 1" in capsys.readouterr().err


def test_run_missing_files_exit_3(tmp_path):
    assert cli.main(["run", "--scenario", str(tmp_path / "no.json"), "--script", "demo", "--embedded"]) == 3
    assert cli.main(["run", "--scenario", "demo", "--script", str(tmp_path / "no.jsonl"), "--embedded"]) == 3


def test_run_unreachable_broker_exit_4():
    rc = cli.main(["run", "--scenario", "demo", "--script", "demo", "--broker", "127.0.0.1:1"])
    assert rc == 4


def test_broker_occupied_port_exit_2(broker, capsys):
    rc = cli.main(["broker", "--listen", broker.address])
    assert rc == 2
    assert "cannot bind" in capsys.readouterr().err


def test_inject_and_tap_roundtrip(broker, capsys):
    event = ContextEvent(zone="desk1", source="ui", kind=EventKind.PRESENCE, value=True, ts=5, seq=1)
    payload = encode_event(event).decode()
    rc = cli.main(
        ["inject", "--broker", broker.address, "--topic", topic_for(event), "--payload", payload, "--retain"]
    )
    assert rc == 0
    rc = cli.main(["tap", "--broker", broker.address, "--filter", "xri/#", "--count", "1"])
    assert rc == 0
    out = capsys.readouterr().out.strip().splitlines()
    row = json.loads(out[-1])
    assert row["topic"] == topic_for(event)
    assert row["payload"]["kind"] == "Presence"
    assert row["retain"] is True


def test_inject_schema_violation_exit_3(broker, capsys):
    rc = cli.main(
        ["inject", "--broker", broker.address, "--topic", "xri/context/desk1/ui/presence", "--payload", '{"v":1,"bad":true}']
    )
    assert rc == 3
    assert "use --raw" in capsys.readouterr().err


def test_inject_raw_bypasses_schema(broker):
    rc = cli.main(
        ["inject", "--broker", broker.address, "--topic", "any/topic/at/all", "--payload", "opaque", "--raw"]
    )
    assert rc == 0


def test_inject_unreachable_exit_4():
    rc = cli.main(["inject", "--broker", "127.0.0.1:1", "--topic", "t", "--payload", "x", "--raw"])
    assert rc == 4


def test_tap_illegal_filter_exit_3(broker, capsys):
    rc = cli.main(["tap", "--broker", broker.address, "--filter", "a/#/b"])
    assert rc == 3
    assert "#" in capsys.readouterr().err


def test_tap_duration_exits_zero(broker):
    rc = cli.main(["tap", "--broker", broker.address, "--filter", "xri/#", "--duration", "0.3"])
    assert rc == 0


def test_inject_observed_by_scenario(tmp_path):
    """Steering parity: an injected presence event moves the scenario,
    verified through a tap."""
    from xri.agents.scenario import ScenarioConfig, run_scenario
    from xri.context.pipeline import SensorScript
    from xri.fabric.broker import Broker
    from xri.fabric.client import Client

    broker = Broker(port=0)
    broker.start()
    try:
        scenario_client = Client("scen")
        scenario_client.connect(broker.address)
        scenario = run_scenario(ScenarioConfig.load(demo.scenario_path()), scenario_client)

        watcher = Client("watch")
        watcher.connect(broker.address)
        watcher.subscribe("xri/agent/plant1/state", qos=1)
        first = watcher.poll(timeout=2)  # retained initial state
        assert json.loads(first.payload)["state"] == "Healthy"

        event = ContextEvent(zone="desk1", source="ui", kind=EventKind.PRESENCE, value=True, ts=1000, seq=1)
        rc = cli.main(
            [
                "inject",
                "--broker",
                broker.address,
                "--topic",
                topic_for(event),
                "--payload",
                encode_event(event).decode(),
            ]
        )
        assert rc == 0
        update = watcher.poll(timeout=3)
        assert update is not None
        assert json.loads(update.payload)["state"] == "Thriving"
        scenario.stop()
        scenario_client.disconnect()
        watcher.disconnect()
    finally:
        broker.stop()


def test_bench_kernels_prints_json(capsys):
    rc = cli.main(["bench", "--kernels"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert "varint_encode" in report["kernels"]
    assert "count_diff_pixels" in report["kernels"]
