"""Threaded MQTT-subset broker.

One reader thread and one writer thread per connection; the session registry,
subscription table and retained store are guarded by a single lock, so routing
decisions form one total order. Clean sessions only: subscriptions die with
the connection, but unacknowledged qos-1 deliveries survive for a reconnect
grace window and are retransmitted with dup=1.
"""

from __future__ import annotations

import logging
import queue
import socket
import threading
import time
from dataclasses import dataclass, field

from xri._kernels import topic_matches
from xri.fabric import packets as pk
from xri.fabric.topics import TopicError, TopicFilter, TopicName

logger = logging.getLogger(__name__)

_OUTBOX_SENTINEL = None


@dataclass
class BrokerConfig:
    max_packet_size: int = 1024 * 1024
    max_sessions: int = 1024
    reconnect_grace_ms: int = 30_000
    # reader wake-up period; bounds keepalive enforcement latency
    poll_interval_s: float = 0.2


@dataclass
class _Session:
    client_id: str
    subscriptions: dict[str, int] = field(default_factory=dict)  # filter -> granted qos
    inflight: dict[int, pk.Publish] = field(default_factory=dict)  # pid -> pending qos-1
    next_packet_id: int = 1
    conn: "_Connection | None" = None
    detached_at: float | None = None  # monotonic seconds

    def alloc_packet_id(self) -> int:
        for _ in range(0xFFFF):
            pid = self.next_packet_id
            self.next_packet_id = pid % 0xFFFF + 1
            if pid not in self.inflight:
                return pid
        raise RuntimeError("no free packet ids (65535 deliveries unacknowledged)")


class _Connection:
    """One accepted socket: reader loop runs in its own thread, writes go
    through an outbox drained by a writer thread."""

    def __init__(self, broker: "Broker", sock: socket.socket, peer: str):
        self.broker = broker
        self.sock = sock
        self.peer = peer
        self.outbox: queue.SimpleQueue = queue.SimpleQueue()
        self.session: _Session | None = None
        self.keepalive = 0
        self.last_rx = time.monotonic()
        self.closing = threading.Event()
        self.writer = threading.Thread(
            target=self._write_loop, name=f"xri-broker-w-{peer}", daemon=True
        )

    def send(self, packet: pk.Packet) -> None:
        self.outbox.put(packet)

    def _write_loop(self) -> None:
        # drain greedily: one wake flushes everything queued, one syscall
        while True:
            packet = self.outbox.get()
            if packet is _OUTBOX_SENTINEL:
                return
            chunks = [pk.encode_packet(packet)]
            try:
                while len(chunks) < 512:
                    nxt = self.outbox.get_nowait()
                    if nxt is _OUTBOX_SENTINEL:
                        self.sock.sendall(b"".join(chunks))
                        return
                    chunks.append(pk.encode_packet(nxt))
            except queue.Empty:
                pass
            except OSError:
                self.closing.set()
                return
            try:
                self.sock.sendall(b"".join(chunks))
            except OSError:
                self.closing.set()
                return

    def run(self) -> None:
        self.writer.start()
        try:
            self._read_loop()
        except pk.BadProtocolVersionError:
            self.send(pk.ConnAck(return_code=pk.CONNACK_BAD_PROTOCOL_VERSION))
        except pk.ProtocolError as exc:
            logger.info("closing %s: %s", self.peer, exc)
        except OSError:
            pass
        finally:
            self._teardown()

    def _read_loop(self) -> None:
        buffer = bytearray()
        self.sock.settimeout(self.broker.config.poll_interval_s)
        while not self.closing.is_set():
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout:
                self._check_keepalive()
                continue
            except OSError:
                return
            if not chunk:
                return
            buffer.extend(chunk)
            self.last_rx = time.monotonic()
            while buffer:
                decoded = pk.decode_packet(bytes(buffer), self.broker.config.max_packet_size)
                if decoded is None:
                    break
                packet, consumed = decoded
                del buffer[:consumed]
                if isinstance(packet, pk.Disconnect):
                    return
                self.broker._handle_packet(self, packet)

    def _check_keepalive(self) -> None:
        if self.keepalive and time.monotonic() - self.last_rx > self.keepalive * 1.5:
            logger.info("keepalive expired for %s", self.peer)
            self.closing.set()

    def _teardown(self) -> None:
        self.closing.set()
        self.broker._detach(self)
        self.outbox.put(_OUTBOX_SENTINEL)
        self.writer.join(timeout=1.0)
        try:
            self.sock.close()
        except OSError:
            pass


class Broker:
    """Accepts MQTT-subset connections and routes publishes to subscribers."""

    def __init__(self, host: str = "127.0.0.1", port: int = 1883, config: BrokerConfig | None = None):
        self.host = host
        self.port = port
        self.config = config or BrokerConfig()
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        self._retained: dict[str, tuple[bytes, int]] = {}
        self._listener: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._reaper_thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self._started_at = 0.0
        self._messages_in = 0
        self._messages_out = 0

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        """Bind and serve. Raises OSError if the address is not bindable."""
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind((self.host, self.port))
        listener.listen(128)
        listener.settimeout(0.2)
        self._listener = listener
        self.port = listener.getsockname()[1]
        self._started_at = time.monotonic()
        self._stopping.clear()
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="xri-broker-accept", daemon=True
        )
        self._accept_thread.start()
        self._reaper_thread = threading.Thread(
            target=self._reap_loop, name="xri-broker-reaper", daemon=True
        )
        self._reaper_thread.start()
        logger.info("broker listening on %s:%d", self.host, self.port)

    def stop(self) -> None:
        self._stopping.set()
        if self._accept_thread:
            self._accept_thread.join(timeout=2.0)
        with self._lock:
            conns = [s.conn for s in self._sessions.values() if s.conn is not None]
        for conn in conns:
            conn.closing.set()
            try:
                conn.sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
        if self._listener:
            self._listener.close()
            self._listener = None

    @property
    def address(self) -> str:
        return f"{self.host}:{self.port}"

    def metrics(self) -> dict:
        """Snapshot for the CLI: clients, traffic counters, retained size."""
        with self._lock:
            clients = sum(1 for s in self._sessions.values() if s.conn is not None)
            return {
                "clients": clients,
                "messages_in": self._messages_in,
                "messages_out": self._messages_out,
                "retained": len(self._retained),
                "uptime_ms": int((time.monotonic() - self._started_at) * 1000),
            }

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                sock, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            conn = _Connection(self, sock, f"{addr[0]}:{addr[1]}")
            threading.Thread(
                target=conn.run, name=f"xri-broker-r-{conn.peer}", daemon=True
            ).start()

    def _reap_loop(self) -> None:
        grace = self.config.reconnect_grace_ms / 1000.0
        while not self._stopping.wait(1.0):
            cutoff = time.monotonic() - grace
            with self._lock:
                stale = [
                    cid
                    for cid, s in self._sessions.items()
                    if s.conn is None and s.detached_at is not None and s.detached_at < cutoff
                ]
                for cid in stale:
                    del self._sessions[cid]

    # -- packet handling ----------------------------------------------------

    def _handle_packet(self, conn: _Connection, packet: pk.Packet) -> None:
        if conn.session is None:
            if not isinstance(packet, pk.Connect):
                raise pk.ProtocolError(f"{type(packet).__name__} before connect")
            self._handle_connect(conn, packet)
            return
        if isinstance(packet, pk.Connect):
            raise pk.ProtocolError("second connect on one connection")
        if isinstance(packet, pk.Publish):
            self._handle_publish(conn, packet)
        elif isinstance(packet, pk.PubAck):
            with self._lock:
                conn.session.inflight.pop(packet.packet_id, None)
        elif isinstance(packet, pk.Subscribe):
            self._handle_subscribe(conn, packet)
        elif isinstance(packet, pk.Unsubscribe):
            with self._lock:
                for topic in packet.topics:
                    conn.session.subscriptions.pop(topic, None)
            conn.send(pk.UnsubAck(packet_id=packet.packet_id))
        elif isinstance(packet, pk.PingReq):
            conn.send(pk.PingResp())
        else:
            raise pk.ProtocolError(f"{type(packet).__name__} not valid client-to-broker")

    def _handle_connect(self, conn: _Connection, packet: pk.Connect) -> None:
        if not packet.client_id:
            conn.send(pk.ConnAck(return_code=pk.CONNACK_IDENTIFIER_REJECTED))
            raise pk.ProtocolError("empty client id")
        with self._lock:
            session = self._sessions.get(packet.client_id)
            if session is None:
                if len(self._sessions) >= self.config.max_sessions:
                    conn.send(pk.ConnAck(return_code=3))  # server unavailable
                    raise pk.ProtocolError("session limit reached")
                session = _Session(client_id=packet.client_id)
                self._sessions[packet.client_id] = session
            elif session.conn is not None:
                # session takeover: the newer connect displaces the older one
                old = session.conn
                old.closing.set()
                try:
                    old.sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
                old.session = None
                session.conn = None
            session.subscriptions.clear()
            session.detached_at = None
            session.conn = conn
            conn.session = session
            conn.keepalive = packet.keepalive
            conn.send(pk.ConnAck(session_present=False, return_code=pk.CONNACK_ACCEPTED))
            # deliveries owed from the previous connection, oldest first
            for pid, publish in session.inflight.items():
                conn.send(
                    pk.Publish(
                        topic=publish.topic,
                        payload=publish.payload,
                        qos=1,
                        retain=publish.retain,
                        dup=True,
                        packet_id=pid,
                    )
                )
                self._messages_out += 1

    def _handle_publish(self, conn: _Connection, packet: pk.Publish) -> None:
        try:
            TopicName(packet.topic)
        except TopicError as exc:
            raise pk.ProtocolError(str(exc)) from None
        with self._lock:
            self._messages_in += 1
            if packet.retain:
                if packet.payload:
                    self._retained[packet.topic] = (packet.payload, packet.qos)
                else:
                    self._retained.pop(packet.topic, None)
            for session in self._sessions.values():
                if session.conn is None:
                    continue
                granted = [
                    qos
                    for topic_filter, qos in session.subscriptions.items()
                    if topic_matches(topic_filter, packet.topic)
                ]
                if not granted:
                    continue
                # one delivery per session at min(publish qos, max granted qos);
                # retain is 0 on live deliveries
                self._deliver(session, packet.topic, packet.payload, min(packet.qos, max(granted)), retain=False)
        if packet.qos == 1:
            conn.send(pk.PubAck(packet_id=packet.packet_id))

    def _handle_subscribe(self, conn: _Connection, packet: pk.Subscribe) -> None:
        filters: list[TopicFilter] = []
        for topic, _qos in packet.topics:
            try:
                filters.append(TopicFilter(topic))
            except TopicError as exc:
                raise pk.ProtocolError(str(exc)) from None
        with self._lock:
            session = conn.session
            granted_codes = []
            for (topic, qos), _parsed in zip(packet.topics, filters):
                session.subscriptions[topic] = qos
                granted_codes.append(qos)
            conn.send(pk.SubAck(packet_id=packet.packet_id, return_codes=tuple(granted_codes)))
            # retained catch-up: once per matching topic, at the best grant
            for retained_topic, (payload, retained_qos) in self._retained.items():
                grants = [
                    qos
                    for topic, qos in packet.topics
                    if topic_matches(topic, retained_topic)
                ]
                if grants:
                    self._deliver(
                        session, retained_topic, payload, min(retained_qos, max(grants)), retain=True
                    )

    def _deliver(self, session: _Session, topic: str, payload: bytes, qos: int, retain: bool) -> None:
        # caller holds self._lock
        packet_id = None
        if qos == 1:
            packet_id = session.alloc_packet_id()
        publish = pk.Publish(
            topic=topic, payload=payload, qos=qos, retain=retain, dup=False, packet_id=packet_id
        )
        if packet_id is not None:
            session.inflight[packet_id] = publish
        if session.conn is not None:
            session.conn.send(publish)
            self._messages_out += 1

    def _detach(self, conn: _Connection) -> None:
        with self._lock:
            session = conn.session
            if session is None or session.conn is not conn:
                return
            session.conn = None
            session.subscriptions.clear()
            session.detached_at = time.monotonic()
            conn.session = None
