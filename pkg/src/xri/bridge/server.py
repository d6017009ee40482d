"""The dashboard bridge: fabric topics in, JSON WebSocket frames out.

Downstream, each client first receives a snapshot of the retained state
topics, then the live stream in fabric order; the snapshot and the stream
handoff happen atomically on the event loop, so no live event for a retained
topic can overtake its snapshot entry. Upstream publishes are restricted to
an allowlist and schema-checked before they reach the fabric.

Frames::

    down  {"type":"snapshot","states":[{"topic","payload","ts"},...]}
          {"type":"event","topic":...,"payload":...,"ts":...}
          {"type":"status","broker":"down"|"up"}
          {"type":"error","code":"forbidden_topic"|"schema_error","detail":...}
          {"type":"ping"} / {"type":"pong"}
    up    {"type":"publish","topic":...,"payload":...}
          {"type":"ping"} / {"type":"pong"}
"""

from __future__ import annotations

import asyncio
import json
import logging
import threading
import time
from dataclasses import dataclass, field

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from xri.core.events import (
    EventKind,
    SchemaError,
    decode_event,
    decode_situation,
    payload_to_json as _payload_to_json,
)
from xri.core.schema import parse_topic, topic_for
from xri.fabric.client import Client, ClientError, ConnectionLostError, parse_address
from xri.fabric.topics import TopicError, TopicFilter, TopicName, topic_matches

logger = logging.getLogger(__name__)

DEFAULT_ALLOWLIST = ("xri/context/", "xri/agent/+/cmd", "xri/scenario/")

WS_PATH = "/xri"


def _allowed(allowlist, topic: str) -> bool:
    for entry in allowlist:
        if "+" in entry or "#" in entry:
            try:
                if topic_matches(TopicFilter(entry), TopicName(topic)):
                    return True
            except TopicError:
                continue
        elif entry.endswith("/"):
            if topic.startswith(entry):
                return True
        elif topic == entry:
            return True
    return False


def _is_retained_schema_topic(topic: str) -> bool:
    """Topics the runtime always publishes retained (agent state, situation,
    clock); live deliveries on them update the snapshot cache even though the
    broker clears the retain flag on routed copies."""
    try:
        category = parse_topic(topic).category
    except SchemaError:
        return False
    return category in ("agent_state", "situation", "clock")


def _validate_upstream(topic: str, payload: bytes) -> None:
    """Schema-check an upstream publish against its topic. Raises SchemaError."""
    parsed = parse_topic(topic)  # SchemaError if off the tree
    if parsed.category == "context":
        event = decode_event(payload)
        if topic_for(event) != topic:
            raise SchemaError(
                f"event addressed to {topic_for(event)!r} cannot be published on {topic!r}"
            )
    elif parsed.category == "agent_cmd":
        event = decode_event(payload)
        if event.kind is not EventKind.COMMAND:
            raise SchemaError("cmd topics carry Command events only")
    elif parsed.category == "situation":
        decode_situation(payload)
    else:
        raise SchemaError(f"{parsed.category} topics are not writable upstream")


@dataclass(eq=False)
class _WsClient:
    queue: asyncio.Queue = field(default_factory=asyncio.Queue)
    missed_pings: int = 0


class Bridge:
    """Runs a WebSocket server (own thread + event loop) bridged to one
    fabric client."""

    def __init__(
        self,
        ws_host: str = "127.0.0.1",
        ws_port: int = 8080,
        broker_address: str = "127.0.0.1:1883",
        allowlist=DEFAULT_ALLOWLIST,
        ping_interval_s: float = 15.0,
        client_id: str = "bridge",
    ):
        self.ws_host = ws_host
        self.ws_port = ws_port
        self.broker_address = broker_address
        self.allowlist = tuple(allowlist)
        self.ping_interval_s = ping_interval_s
        self.client = Client(client_id, keepalive=30)
        self._retained: dict[str, tuple[object, int]] = {}
        self._clients: set[_WsClient] = set()
        self._loop: asyncio.AbstractEventLoop | None = None
        self._loop_ready = threading.Event()
        self._stopping = threading.Event()
        self._threads: list[threading.Thread] = []
        self._server = None
        self.broker_up = False

    # -- lifecycle -------------------------------------------------------------

    def start(self) -> None:
        """Connect to the broker and open the WebSocket endpoint."""
        self.client.connect(parse_address(self.broker_address))
        self.client.subscribe("xri/#", qos=1)
        self.broker_up = True
        loop_thread = threading.Thread(target=self._run_loop, name="xri-bridge-loop", daemon=True)
        loop_thread.start()
        self._threads.append(loop_thread)
        if not self._loop_ready.wait(5.0):
            raise RuntimeError("bridge event loop failed to start")
        pump = threading.Thread(target=self._pump, name="xri-bridge-pump", daemon=True)
        pump.start()
        self._threads.append(pump)
        logger.info("bridge serving ws://%s:%d%s", self.ws_host, self.ws_port, WS_PATH)

    def stop(self) -> None:
        self._stopping.set()
        if self._loop is not None:
            self._loop.call_soon_threadsafe(self._loop.stop)
        try:
            self.client.disconnect()
        except ClientError:
            pass
        for thread in self._threads:
            thread.join(timeout=2.0)

    @property
    def url(self) -> str:
        return f"ws://{self.ws_host}:{self.ws_port}{WS_PATH}"

    # -- fabric side (threads) ---------------------------------------------------

    def _pump(self) -> None:
        backoff = 0.2
        while not self._stopping.is_set():
            try:
                message = self.client.poll(timeout=0.2)
                backoff = 0.2
            except ConnectionLostError:
                if self._stopping.is_set():
                    return
                if self.broker_up:
                    self.broker_up = False
                    self._post(self._broadcast, {"type": "status", "broker": "down"})
                time.sleep(backoff)
                backoff = min(backoff * 2, 5.0)
                try:
                    self.client.reconnect()
                    self.broker_up = True
                    self._post(self._broadcast, {"type": "status", "broker": "up"})
                except Exception:
                    pass
                continue
            if message is None:
                continue
            payload = _payload_to_json(message.payload)
            ts = int(time.time() * 1000)
            self._post(self._ingest, message.topic, payload, ts, message.retain, len(message.payload))

    def _post(self, fn, *args) -> None:
        if self._loop is not None and not self._stopping.is_set():
            try:
                self._loop.call_soon_threadsafe(fn, *args)
            except RuntimeError:
                pass  # loop already closed

    # -- event-loop side -----------------------------------------------------------

    def _run_loop(self) -> None:
        loop = asyncio.new_event_loop()
        asyncio.set_event_loop(loop)
        self._loop = loop

        async def _start():
            self._server = await serve(
                self._handler, self.ws_host, self.ws_port, ping_interval=None
            )
            if self.ws_port == 0:
                self.ws_port = next(iter(self._server.sockets)).getsockname()[1]

        try:
            loop.run_until_complete(_start())
            self._loop_ready.set()
            loop.run_forever()
        finally:
            if self._server is not None:
                self._server.close()
            loop.run_until_complete(asyncio.sleep(0))
            loop.close()
            self._loop_ready.set()

    def _ingest(self, topic: str, payload, ts: int, retain: bool, raw_len: int) -> None:
        # runs on the loop: cache update and fan-out are one atomic step
        if retain or topic in self._retained or _is_retained_schema_topic(topic):
            if raw_len == 0:
                self._retained.pop(topic, None)
            else:
                self._retained[topic] = (payload, ts)
        if raw_len == 0 and retain:
            return
        self._broadcast({"type": "event", "topic": topic, "payload": payload, "ts": ts})

    def _broadcast(self, frame: dict) -> None:
        for ws_client in self._clients:
            ws_client.queue.put_nowait(frame)

    async def _handler(self, connection) -> None:
        if connection.request.path.split("?")[0] != WS_PATH:
            await connection.close(code=1008, reason=f"connect to {WS_PATH}")
            return
        ws_client = _WsClient()
        # snapshot assembly and registration happen without an await between
        # them: no live event can slip in before the snapshot
        snapshot = {
            "type": "snapshot",
            "states": [
                {"topic": topic, "payload": payload, "ts": ts}
                for topic, (payload, ts) in sorted(self._retained.items())
            ],
        }
        if not self.broker_up:
            ws_client.queue.put_nowait({"type": "status", "broker": "down"})
        self._clients.add(ws_client)
        try:
            await connection.send(json.dumps(snapshot, separators=(",", ":")))
            sender = asyncio.create_task(self._send_loop(connection, ws_client))
            pinger = asyncio.create_task(self._ping_loop(connection, ws_client))
            try:
                async for raw in connection:
                    ws_client.missed_pings = 0
                    await self._handle_upstream(connection, raw)
            except ConnectionClosed:
                pass
            finally:
                sender.cancel()
                pinger.cancel()
        except ConnectionClosed:
            pass
        finally:
            self._clients.discard(ws_client)

    async def _send_loop(self, connection, ws_client: _WsClient) -> None:
        while True:
            frame = await ws_client.queue.get()
            await connection.send(json.dumps(frame, separators=(",", ":")))

    async def _ping_loop(self, connection, ws_client: _WsClient) -> None:
        while True:
            await asyncio.sleep(self.ping_interval_s)
            if ws_client.missed_pings >= 2:
                await connection.close(code=1001, reason="heartbeat lost")
                return
            ws_client.missed_pings += 1
            ws_client.queue.put_nowait({"type": "ping"})

    async def _handle_upstream(self, connection, raw) -> None:
        async def send_error(code: str, detail: str) -> None:
            await connection.send(
                json.dumps({"type": "error", "code": code, "detail": detail}, separators=(",", ":"))
            )

        try:
            frame = json.loads(raw)
        except ValueError:
            await send_error("schema_error", "frame is not JSON")
            return
        if not isinstance(frame, dict) or "type" not in frame:
            await send_error("schema_error", "frame needs a type")
            return
        kind = frame["type"]
        if kind == "ping":
            await connection.send(json.dumps({"type": "pong"}, separators=(",", ":")))
            return
        if kind == "pong":
            return
        if kind != "publish":
            await send_error("schema_error", f"unsupported frame type {kind!r}")
            return
        topic = frame.get("topic")
        if not isinstance(topic, str) or not _allowed(self.allowlist, topic):
            await send_error("forbidden_topic", f"{topic!r} is not writable through the bridge")
            return
        payload = frame.get("payload")
        data = (
            payload.encode("utf-8")
            if isinstance(payload, str)
            else json.dumps(payload, separators=(",", ":"), ensure_ascii=False).encode("utf-8")
        )
        try:
            _validate_upstream(topic, data)
        except SchemaError as exc:
            await send_error("schema_error", str(exc))
            return
        loop = asyncio.get_running_loop()
        try:
            await loop.run_in_executor(None, lambda: self.client.publish(topic, data, qos=1))
        except ClientError as exc:
            await send_error("schema_error", f"fabric publish failed: {exc}")
