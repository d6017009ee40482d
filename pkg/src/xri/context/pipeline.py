"""Sensor script replay: frames and signals in, debounced context events out.

Scripts are JSON Lines. An optional first directive line sets defaults:

    {"seed": 7, "zone": "desk1"}

Every other line is a timestamped entry (non-decreasing ts):

    {"ts": 0,    "source": "cam0",    "kind": "frame", "synth": {"base": 150, "noise": 5}}
    {"ts": 1000, "source": "cam0",    "kind": "frame", "ref": "frames/bright.pgm"}
    {"ts": 2000, "source": "laptop0", "kind": "activity", "value": "Working"}
    {"ts": 3000, "source": "soil0",   "kind": "moisture", "value": 0.8}
    {"ts": 4000, "source": "ui",      "kind": "command", "value": {"verb": "resume"}}

'#'-prefixed lines are comments. A run is a pure function of
(script, config, seed): same inputs, byte-identical published payloads.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from xri.context.debounce import Debouncer
from xri.context.detectors import ActivityClassifier, DetectorConfig, detect_light, detect_presence, mean_luminance
from xri.context.frames import Blob, Frame, read_pgm, synth_frame
from xri.core.events import (
    Activity,
    CommandValue,
    ContextEvent,
    EventKind,
    LightValue,
    SchemaError,
    _check_level,
    encode_event,
)
from xri.core.schema import topic_for

SENSOR_KINDS = {"frame", "activity", "moisture"}


class PipelineError(Exception):
    """Publishing failed after retries, or the script cannot run."""


class ScriptError(ValueError):
    """Malformed sensor script; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ScriptEntry:
    ts: int
    zone: str
    source: str
    kind: str  # frame | activity | moisture | command
    ref: str | None = None
    synth: dict | None = None
    value: object = None


@dataclass
class SensorScript:
    entries: list[ScriptEntry] = field(default_factory=list)
    seed: int | None = None
    default_zone: str = "desk1"
    base_dir: Path = field(default_factory=Path)

    @property
    def end_ts(self) -> int:
        return self.entries[-1].ts if self.entries else 0

    @classmethod
    def load(cls, path) -> "SensorScript":
        path = Path(path)
        script = cls(base_dir=path.parent)
        last_ts = None
        source_roles: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    obj = json.loads(line)
                except ValueError as exc:
                    raise ScriptError(f"not valid JSON: {exc}", lineno) from None
                if not isinstance(obj, dict):
                    raise ScriptError("entry must be a JSON object", lineno)
                if "ts" not in obj:
                    # directive line: defaults for the whole script
                    if script.entries:
                        raise ScriptError("directive line must precede all entries", lineno)
                    if "seed" in obj:
                        script.seed = int(obj["seed"])
                    if "zone" in obj:
                        script.default_zone = obj["zone"]
                    unknown = set(obj) - {"seed", "zone"}
                    if unknown:
                        raise ScriptError(f"unknown directive fields {sorted(unknown)}", lineno)
                    continue
                entry = cls._parse_entry(obj, script.default_zone, lineno)
                if last_ts is not None and entry.ts < last_ts:
                    raise ScriptError(f"ts {entry.ts} decreases (previous {last_ts})", lineno)
                last_ts = entry.ts
                role = "command" if entry.kind == "command" else "sensor"
                if source_roles.setdefault(entry.source, role) != role:
                    raise ScriptError(
                        f"source {entry.source!r} mixes command and sensor entries "
                        "(would break per-source timestamp ordering)",
                        lineno,
                    )
                script.entries.append(entry)
        return script

    @staticmethod
    def _parse_entry(obj: dict, default_zone: str, lineno: int) -> ScriptEntry:
        try:
            ts = int(obj["ts"])
            source = obj["source"]
            kind = obj["kind"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScriptError(f"entry needs integer ts, source, kind ({exc})", lineno) from None
        if kind not in SENSOR_KINDS | {"command"}:
            raise ScriptError(f"unknown entry kind {kind!r}", lineno)
        if kind == "frame":
            if ("ref" in obj) == ("synth" in obj):
                raise ScriptError("frame entry needs exactly one of ref|synth", lineno)
        elif "value" not in obj:
            raise ScriptError(f"{kind} entry needs a value", lineno)
        try:
            _check_level(source, "source")
            _check_level(obj.get("zone", default_zone), "zone")
        except SchemaError as exc:
            raise ScriptError(str(exc), lineno) from None
        return ScriptEntry(
            ts=ts,
            zone=obj.get("zone", default_zone),
            source=source,
            kind=kind,
            ref=obj.get("ref"),
            synth=obj.get("synth"),
            value=obj.get("value"),
        )


class _RetryingPublisher:
    """qos-1 publish with bounded retry; reconnects when the client can."""

    def __init__(self, client, retries: int = 3, backoff_s: float = 0.05):
        self.client = client
        self.retries = retries
        self.backoff_s = backoff_s

    def publish(self, topic: str, payload: bytes, retain: bool = False) -> None:
        attempt = 0
        while True:
            try:
                self.client.publish(topic, payload, qos=1, retain=retain)
                return
            except Exception as exc:
                if attempt >= self.retries:
                    raise PipelineError(f"publish to {topic} failed after {attempt + 1} attempts: {exc}")
                time.sleep(self.backoff_s * (2**attempt))
                attempt += 1
                reconnect = getattr(self.client, "reconnect", None)
                if reconnect is not None:
                    try:
                        reconnect()
                    except Exception:
                        pass


class _SourceState:
    __slots__ = ("background", "light_raw", "activity")

    def __init__(self):
        self.background: Frame | None = None
        self.light_raw = False
        self.activity = ActivityClassifier()


def run_pipeline(
    script: SensorScript,
    cfg: DetectorConfig,
    client,
    seed: int | None = None,
    clock=None,
) -> int:
    """Replay ``script`` through the detectors, publishing context events.

    ``seed`` overrides the script's own seed; ``clock`` (optional) gets
    ``advance_to(ts)`` before each entry, which paces wall-clock playback.
    Returns the number of events published.
    """
    rng = random.Random(script.seed if seed is None else seed)
    publisher = _RetryingPublisher(client)
    sources: dict[str, _SourceState] = {}
    debouncers: dict[tuple[str, str, EventKind], Debouncer] = {}
    seqs: dict[str, int] = {}
    zone_presence: dict[str, bool] = {}
    published = 0

    def debouncer(zone: str, source: str, kind: EventKind) -> Debouncer:
        key = (zone, source, kind)
        if key not in debouncers:
            debouncers[key] = Debouncer(cfg.debounce_ms)
        return debouncers[key]

    def publish_event(zone: str, source: str, kind: EventKind, value, ts: int) -> None:
        nonlocal published
        seqs[source] = seqs.get(source, 0) + 1
        event = ContextEvent(zone=zone, source=source, kind=kind, value=value, ts=ts, seq=seqs[source])
        publisher.publish(topic_for(event), encode_event(event))
        published += 1

    def settle(zone: str, source: str, kind: EventKind, emissions) -> None:
        for ts, value, rider in emissions:
            if kind is EventKind.PRESENCE:
                zone_presence[zone] = value
                publish_event(zone, source, kind, value, ts)
                # presence gates the activity classification of the zone
                for other_source, state in sources.items():
                    key = (zone, other_source, EventKind.ACTIVITY)
                    if key in debouncers:
                        label = state.activity.reclassify(presence=value)
                        settle(zone, other_source, EventKind.ACTIVITY, debouncers[key].feed(ts, label))
            elif kind is EventKind.LIGHT_LEVEL:
                publish_event(zone, source, kind, LightValue(on=value, mean_luminance=rider), ts)
            else:
                publish_event(zone, source, kind, value, ts)

    def load_frame(entry: ScriptEntry) -> Frame:
        if entry.ref is not None:
            return read_pgm(script.base_dir / entry.ref, source=entry.source, ts=entry.ts)
        spec = entry.synth
        blob = None
        if spec.get("blob"):
            b = spec["blob"]
            blob = Blob(x=b["x"], y=b["y"], width=b["w"], height=b["h"], value=b["value"])
        return synth_frame(
            width=spec.get("width", 64),
            height=spec.get("height", 48),
            base=spec["base"],
            noise=spec.get("noise", 0),
            rng=rng,
            blob=blob,
            source=entry.source,
            ts=entry.ts,
        )

    def flush_all(now: int) -> None:
        # logical time reached `now`: emit every change that has held long
        # enough, regardless of which signal the next entry feeds
        for (zone, source, kind), deb in list(debouncers.items()):
            settle(zone, source, kind, deb.flush(now))

    for entry in script.entries:
        if clock is not None:
            clock.advance_to(entry.ts)
        flush_all(entry.ts)
        state = sources.setdefault(entry.source, _SourceState())
        if entry.kind == "frame":
            frame = load_frame(entry)
            if state.background is None:
                state.background = frame
            presence = detect_presence(state.background, frame, cfg)
            state.light_raw = detect_light(frame, state.light_raw, cfg)
            settle(
                entry.zone,
                entry.source,
                EventKind.PRESENCE,
                debouncer(entry.zone, entry.source, EventKind.PRESENCE).feed(entry.ts, presence),
            )
            settle(
                entry.zone,
                entry.source,
                EventKind.LIGHT_LEVEL,
                debouncer(entry.zone, entry.source, EventKind.LIGHT_LEVEL).feed(
                    entry.ts, state.light_raw, rider=mean_luminance(frame)
                ),
            )
        elif entry.kind == "activity":
            try:
                label = Activity(entry.value)
            except ValueError:
                raise PipelineError(f"unknown activity label {entry.value!r} at ts {entry.ts}")
            classified = state.activity.observe(label, presence=zone_presence.get(entry.zone, False))
            settle(
                entry.zone,
                entry.source,
                EventKind.ACTIVITY,
                debouncer(entry.zone, entry.source, EventKind.ACTIVITY).feed(entry.ts, classified),
            )
        elif entry.kind == "moisture":
            try:
                moisture = float(entry.value)
            except (TypeError, ValueError):
                raise PipelineError(f"moisture value {entry.value!r} at ts {entry.ts} is not a number")
            settle(
                entry.zone,
                entry.source,
                EventKind.MOISTURE,
                debouncer(entry.zone, entry.source, EventKind.MOISTURE).feed(entry.ts, moisture),
            )
        else:  # command
            value = entry.value if isinstance(entry.value, dict) else {"verb": str(entry.value)}
            command = CommandValue(verb=value.get("verb", ""), args=tuple(value.get("args", ())))
            publish_event(entry.zone, entry.source, EventKind.COMMAND, command, entry.ts)

    # confirm whatever still holds at script end
    flush_all(script.end_ts)
    return published
