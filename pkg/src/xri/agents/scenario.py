"""The smart-workstation scenario orchestrator.

Consumes context events from the fabric, steps the agents, drives the
pomodoro cycle, classifies per-zone situations and publishes retained agent
states and situations. Every step appends one JSON line to the trace, so a
scripted run is byte-reproducible.

Processing order per inbound event: pomodoro boundaries up to the event time
first, then the zone's situation (presence/activity/pomodoro effects), then
the agent steps, then the situation again (plant-state effects).
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field, replace

from xri.agents.clock import ClockMode, LogicalClock
from xri.agents.machine import AgentInstance, AgentSpec, ConfigError, agent_spec_from_json, step
from xri.agents.pomodoro import Phase, PomodoroConfig, PomodoroState, pomodoro_advance, pomodoro_resume
from xri.agents.situation import classify_situation
from xri.core.events import (
    Activity,
    AgentStatePayload,
    ContextEvent,
    EventKind,
    SchemaError,
    SituationSet,
    _value_to_json,
    decode_clock,
    decode_event,
    encode_situation,
    encode_state,
)
from xri.core.profiles import Agency, AgencyTrait, ControllerKind, CubeAxis, MiraProfile
from xri.core.schema import CLOCK_TOPIC, agent_state_topic, parse_topic, situation_topic
from xri.fabric.client import Client, ConnectionLostError

logger = logging.getLogger(__name__)

POMODORO_AGENT_ID = "pomodoro"

_POMODORO_PROFILE = MiraProfile(
    agency=Agency.WEAK,
    agency_traits=frozenset({AgencyTrait.REACTIVITY, AgencyTrait.PROACTIVITY}),
    corporeal_presence=CubeAxis(virtual=0.5, physical=0.0),
    interactive_capacity=CubeAxis(virtual=0.5, physical=0.0),
    controller_kind=ControllerKind.FSM,
)


@dataclass
class ScenarioConfig:
    agents: list[AgentSpec]
    pomodoro: PomodoroConfig = field(default_factory=PomodoroConfig)
    zones: list[str] = field(default_factory=list)
    plant_agents: dict[str, str] = field(default_factory=dict)  # zone -> agent id

    @classmethod
    def from_json(cls, obj: dict) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise ConfigError("scenario", "must be a JSON object")
        if "agents" not in obj or not isinstance(obj["agents"], list) or not obj["agents"]:
            raise ConfigError("agents", "must be a non-empty list")
        agents = [
            agent_spec_from_json(a, path=f"agents[{i}]") for i, a in enumerate(obj["agents"])
        ]
        seen = set()
        for i, spec in enumerate(agents):
            if spec.agent_id == POMODORO_AGENT_ID:
                raise ConfigError(f"agents[{i}].id", f"{POMODORO_AGENT_ID!r} is reserved")
            if spec.agent_id in seen:
                raise ConfigError(f"agents[{i}].id", f"duplicate agent id {spec.agent_id!r}")
            seen.add(spec.agent_id)
        pomo_obj = obj.get("pomodoro", {})
        if not isinstance(pomo_obj, dict):
            raise ConfigError("pomodoro", "must be an object")
        try:
            pomodoro = PomodoroConfig(
                work_duration_ms=int(pomo_obj.get("work_ms", 25 * 60_000)),
                break_duration_ms=int(pomo_obj.get("break_ms", 5 * 60_000)),
                auto_advance=bool(pomo_obj.get("auto_advance", True)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError("pomodoro", str(exc)) from None
        zones = list(obj.get("zones", [])) or sorted({a.zone for a in agents})
        plant_agents = dict(obj.get("plant_agents", {}))
        by_id = {a.agent_id: a for a in agents}
        for zone, agent_id in plant_agents.items():
            if agent_id not in by_id:
                raise ConfigError(f"plant_agents.{zone}", f"unknown agent {agent_id!r}")
        for zone in zones:
            if zone not in plant_agents:
                # first agent in the zone with alert states acts as the plant
                for spec in agents:
                    if spec.zone == zone and {"NeedsWater", "NeedsLight"} & set(spec.states):
                        plant_agents[zone] = spec.agent_id
                        break
        return cls(agents=agents, pomodoro=pomodoro, zones=zones, plant_agents=plant_agents)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except ValueError as exc:
                raise ConfigError("scenario", f"not valid JSON: {exc}") from None
        return cls.from_json(obj)


@dataclass
class _ZoneContext:
    presence: bool | None = None
    activity: Activity | None = None
    situation: SituationSet | None = None


class Scenario:
    """Running scenario bound to one fabric client. Event-ordered and
    single-threaded: all steps happen on the internal loop thread."""

    def __init__(
        self,
        config: ScenarioConfig,
        client: Client,
        clock: LogicalClock | None = None,
        trace=None,
    ):
        self.config = config
        self.client = client
        self.clock = clock or LogicalClock(ClockMode.SCRIPTED)
        self.trace = trace
        self.instances: dict[str, AgentInstance] = {
            spec.agent_id: AgentInstance.create(spec) for spec in config.agents
        }
        self.pomodoro = PomodoroState()
        self.zones: dict[str, _ZoneContext] = {z: _ZoneContext() for z in config.zones}
        self._seqs: dict[str, int] = {}
        self._thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self._ended = threading.Event()
        self.steps = 0
        self.schema_errors = 0

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self.client.subscribe("xri/context/#", qos=1)
        self.client.subscribe("xri/agent/+/cmd", qos=1)
        self.client.subscribe(CLOCK_TOPIC, qos=1)
        now = self.clock.now_ms
        for agent_id, instance in self.instances.items():
            self._trace_row(now, agent_id, {"kind": "Init"}, None, instance.state, instance.outputs)
            self._publish_agent_state(instance, now)
        self._trace_row(now, POMODORO_AGENT_ID, {"kind": "Init"}, None, self.pomodoro.phase.value, {})
        self._publish_pomodoro(now)
        for zone in self.config.zones:
            self._classify_zone(zone, now, {"kind": "Init"})
        self._thread = threading.Thread(target=self._loop, name="xri-scenario", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stopping.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def run_until_end(self, timeout: float | None = None) -> bool:
        """Block until the end-of-script clock message has been processed."""
        done = self._ended.wait(timeout)
        if done:
            self.stop()
        return done

    # -- the loop -------------------------------------------------------------

    def _loop(self) -> None:
        backoff = 0.2
        while not self._stopping.is_set():
            try:
                message = self.client.poll(timeout=0.2)
                backoff = 0.2
            except ConnectionLostError:
                if self._stopping.is_set() or self._ended.is_set():
                    return
                # scripted time is event-driven, so it pauses by itself;
                # wall mode keeps reconnecting with backoff
                time.sleep(backoff)
                backoff = min(backoff * 2, 5.0)
                try:
                    self.client.reconnect()
                    logger.info("scenario reconnected to the fabric")
                except Exception:
                    pass
                continue
            if message is None:
                if self.clock.mode is ClockMode.WALL:
                    self._advance_time(self.clock.now_ms)
                continue
            try:
                self._handle_message(message)
            except SchemaError as exc:
                self.schema_errors += 1
                logger.warning("dropping message on %s: %s", message.topic, exc)

    def _handle_message(self, message) -> None:
        try:
            parsed = parse_topic(message.topic)
        except SchemaError:
            self.schema_errors += 1
            return
        if parsed.category == "clock":
            now, end = decode_clock(message.payload)
            self.clock.advance_to(now)
            self._advance_time(now)
            if end:
                self._trace_row(now, "scenario", {"kind": "EndOfScript"}, None, "ended", {})
                self._ended.set()
            return
        if parsed.category == "context":
            event = decode_event(message.payload)
            self._process_event(event)
            return
        if parsed.category == "agent_cmd":
            event = decode_event(message.payload)
            if event.kind is not EventKind.COMMAND:
                raise SchemaError(f"cmd topic payload must be a Command event, got {event.kind.value}")
            self._process_event(event, only_agent=parsed.agent_id)
            return
        # retained agent_state/situation echoes are not subscribed; ignore

    # -- time and the pomodoro -------------------------------------------------

    def _advance_time(self, now: int) -> None:
        _, transitions = pomodoro_advance(self.config.pomodoro, self.pomodoro, now)
        for boundary, before, state_after in transitions:
            # walk boundary by boundary so each window classifies correctly
            self.pomodoro = state_after
            self._trace_row(
                boundary, POMODORO_AGENT_ID, {"kind": "PomodoroTick"}, before.value, state_after.phase.value, {}
            )
            self._publish_pomodoro(boundary)
            for zone in self.config.zones:
                self._classify_zone(zone, boundary, {"kind": "PomodoroTick"})

    def _resume_pomodoro(self, event: ContextEvent) -> None:
        _, transitions = pomodoro_resume(self.config.pomodoro, self.pomodoro, event.ts)
        for ts, before, state_after in transitions:
            self.pomodoro = state_after
            self._trace_row(ts, POMODORO_AGENT_ID, self._event_desc(event), before.value, state_after.phase.value, {})
            self._publish_pomodoro(ts)
            for zone in self.config.zones:
                self._classify_zone(zone, ts, self._event_desc(event))

    # -- event processing --------------------------------------------------------

    def _process_event(self, event: ContextEvent, only_agent: str | None = None) -> None:
        self.clock.advance_to(event.ts)
        self._advance_time(event.ts)
        zone = self.zones.get(event.zone)
        if zone is None:
            zone = self.zones.setdefault(event.zone, _ZoneContext())
        if event.kind is EventKind.PRESENCE:
            zone.presence = event.value
        elif event.kind is EventKind.ACTIVITY:
            zone.activity = event.value
        if event.kind is EventKind.COMMAND and event.value.verb == "resume":
            if only_agent in (None, POMODORO_AGENT_ID):
                self._resume_pomodoro(event)
        self._classify_zone(event.zone, event.ts, self._event_desc(event))
        desc = self._event_desc(event)
        for agent_id, instance in list(self.instances.items()):
            if only_agent is not None and agent_id != only_agent:
                continue
            if only_agent is None and instance.spec.zone != event.zone:
                continue
            if event.kind not in instance.spec.subscribes:
                continue
            new_instance, actions = step(instance, event, event.ts)
            self.instances[agent_id] = new_instance
            self.steps += 1
            self._trace_row(
                event.ts,
                agent_id,
                desc,
                instance.state,
                new_instance.state,
                new_instance.outputs if actions else {},
            )
            for _action in actions:
                self._publish_agent_state(new_instance, event.ts)
        self._classify_zone(event.zone, event.ts, desc)

    def _classify_zone(self, zone_id: str, now: int, event_desc: dict) -> None:
        zone = self.zones.get(zone_id)
        if zone is None:
            return
        plant_id = self.config.plant_agents.get(zone_id)
        plant_state = self.instances[plant_id].state if plant_id in self.instances else None
        situation = classify_situation(
            zone=zone_id,
            presence=zone.presence,
            activity=zone.activity,
            pomodoro_phase=self.pomodoro.phase,
            plant_state=plant_state,
        )
        if situation == zone.situation:
            return
        before = zone.situation.user_mode.value if zone.situation else None
        zone.situation = situation
        for instance in list(self.instances.values()):
            if instance.spec.zone == zone_id:
                self.instances[instance.spec.agent_id] = replace(instance, situation=situation)
        self._trace_row(
            now,
            "scenario",
            event_desc,
            before,
            situation.user_mode.value,
            {
                "zone": zone_id,
                "user_mode": situation.user_mode.value,
                "plant_alerts": sorted(a.value for a in situation.plant_alerts),
            },
        )
        self.client.publish(situation_topic(zone_id), encode_situation(situation, now), qos=1, retain=True)

    # -- publications -----------------------------------------------------------

    def _next_seq(self, agent_id: str) -> int:
        self._seqs[agent_id] = self._seqs.get(agent_id, 0) + 1
        return self._seqs[agent_id]

    def _publish_agent_state(self, instance: AgentInstance, now: int) -> None:
        payload = AgentStatePayload(
            agent_id=instance.spec.agent_id,
            state=instance.state,
            outputs=instance.outputs,
            profile=instance.spec.profile,
            ts=now,
            seq=self._next_seq(instance.spec.agent_id),
        )
        self.client.publish(
            agent_state_topic(instance.spec.agent_id), encode_state(payload), qos=1, retain=True
        )

    def _publish_pomodoro(self, now: int) -> None:
        duration = self.pomodoro.duration_ms(self.config.pomodoro)
        payload = AgentStatePayload(
            agent_id=POMODORO_AGENT_ID,
            state=self.pomodoro.phase.value,
            outputs={
                "phase_started_ms": self.pomodoro.phase_started_ms,
                "phase_duration_ms": duration if duration is not None else 0,
                "auto_advance": self.config.pomodoro.auto_advance,
            },
            profile=_POMODORO_PROFILE,
            ts=now,
            seq=self._next_seq(POMODORO_AGENT_ID),
        )
        self.client.publish(agent_state_topic(POMODORO_AGENT_ID), encode_state(payload), qos=1, retain=True)

    # -- tracing -----------------------------------------------------------------

    @staticmethod
    def _event_desc(event: ContextEvent) -> dict:
        return {
            "kind": event.kind.value,
            "zone": event.zone,
            "source": event.source,
            "value": _value_to_json(event.kind, event.value),
            "seq": event.seq,
        }

    def _trace_row(
        self, ts: int, agent: str, event_desc: dict, before: str | None, after: str, outputs: dict
    ) -> None:
        if self.trace is None:
            return
        row = {
            "ts": ts,
            "agent": agent,
            "event": event_desc,
            "state_before": before,
            "state_after": after,
            "outputs": {k: outputs[k] for k in sorted(outputs)},
        }
        self.trace.write(json.dumps(row, separators=(",", ":"), ensure_ascii=False) + "\n")


def run_scenario(
    config: ScenarioConfig,
    client: Client,
    clock: LogicalClock | None = None,
    trace=None,
) -> Scenario:
    """Start a scenario on a connected client; returns the running handle."""
    scenario = Scenario(config, client, clock=clock, trace=trace)
    scenario.start()
    return scenario
