"""Synchronous MQTT-subset client.

A background reader thread parses the inbound stream: publishes land in a
poll queue, acks wake the blocked caller. Connection loss surfaces as
:class:`ConnectionLostError`; ``reconnect()`` re-subscribes and retransmits
unacknowledged qos-1 publishes with dup=1.
"""

from __future__ import annotations

import logging
import socket
import threading
import time
from dataclasses import dataclass
from queue import Empty, Queue

from xri.fabric import packets as pk
from xri.fabric.topics import TopicFilter, TopicName

logger = logging.getLogger(__name__)


class ClientError(Exception):
    """Connect refused or protocol violation by the broker."""


class ConnectionLostError(ClientError):
    """The link dropped; the client may reconnect() and continue."""


@dataclass(frozen=True)
class InboundMessage:
    topic: str
    payload: bytes
    qos: int
    retain: bool
    dup: bool


def parse_address(address: str, default_port: int = 1883) -> tuple[str, int]:
    """Parse 'host:port' (port optional) into a connect tuple."""
    host, sep, port = address.rpartition(":")
    if not sep:
        return address, default_port
    return host, int(port)


class _Pending:
    __slots__ = ("event", "result", "error")

    def __init__(self):
        self.event = threading.Event()
        self.result = None
        self.error: Exception | None = None


class Client:
    """One broker connection. Safe for concurrent publishes; poll() is
    single-consumer."""

    def __init__(self, client_id: str, keepalive: int = 60):
        self.client_id = client_id
        self.keepalive = keepalive
        self._address: tuple[str, int] | None = None
        self._sock: socket.socket | None = None
        self._reader: threading.Thread | None = None
        self._send_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._pending: dict[int, _Pending] = {}
        self._connack: _Pending | None = None
        self._unacked: dict[int, pk.Publish] = {}  # qos-1 awaiting puback, send order
        self._subscriptions: dict[str, int] = {}
        self._next_pid = 1
        self._inbound: Queue[InboundMessage] = Queue()
        self._connected = threading.Event()
        self._last_send = 0.0

    # -- connection management ----------------------------------------------

    def connect(self, address: str | tuple[str, int], timeout: float = 5.0) -> None:
        if isinstance(address, str):
            address = parse_address(address)
        self._address = address
        self._open(timeout)

    def reconnect(self, timeout: float = 5.0) -> None:
        """Re-establish the link, re-subscribe, retransmit unacked publishes."""
        if self._address is None:
            raise ClientError("never connected")
        self._shutdown_socket()
        if self._reader is not None:
            self._reader.join(timeout=2.0)
        self._open(timeout)
        with self._state_lock:
            subscriptions = dict(self._subscriptions)
            retransmit = list(self._unacked.items())
        for topic_filter, qos in subscriptions.items():
            self._request_subscribe({topic_filter: qos}, timeout)
        for pid, publish in retransmit:
            self._send(
                pk.Publish(
                    topic=publish.topic,
                    payload=publish.payload,
                    qos=1,
                    retain=publish.retain,
                    dup=True,
                    packet_id=pid,
                )
            )

    def _open(self, timeout: float) -> None:
        sock = socket.create_connection(self._address, timeout=timeout)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.settimeout(0.2)
        self._sock = sock
        self._connack = _Pending()
        self._last_send = time.monotonic()
        self._connected.set()
        self._reader = threading.Thread(
            target=self._read_loop, name=f"xri-client-{self.client_id}", daemon=True
        )
        self._reader.start()
        self._send(
            pk.Connect(client_id=self.client_id, keepalive=self.keepalive, clean_session=True)
        )
        if not self._connack.event.wait(timeout):
            self._shutdown_socket()
            raise ClientError("timed out waiting for connack")
        if self._connack.error:
            raise self._connack.error
        ack: pk.ConnAck = self._connack.result
        if ack.return_code != pk.CONNACK_ACCEPTED:
            self._shutdown_socket()
            raise ClientError(f"connect refused with return code {ack.return_code}")

    def disconnect(self) -> None:
        if self._connected.is_set():
            try:
                self._send(pk.Disconnect())
            except ClientError:
                pass
        self._shutdown_socket()
        if self._reader is not None:
            self._reader.join(timeout=2.0)

    @property
    def connected(self) -> bool:
        return self._connected.is_set()

    # -- operations -----------------------------------------------------------

    def publish(
        self,
        topic: str,
        payload: bytes | str,
        qos: int = 0,
        retain: bool = False,
        timeout: float = 10.0,
    ) -> None:
        """Publish; with qos=1 this blocks until the broker's PubAck."""
        TopicName(topic)
        if isinstance(payload, str):
            payload = payload.encode("utf-8")
        if qos == 0:
            self._send(pk.Publish(topic=topic, payload=payload, qos=0, retain=retain))
            return
        if qos != 1:
            raise ValueError(f"qos {qos} outside the supported 0/1 subset")
        with self._state_lock:
            pid = self._alloc_pid()
            publish = pk.Publish(topic=topic, payload=payload, qos=1, retain=retain, packet_id=pid)
            self._unacked[pid] = publish
            pending = _Pending()
            self._pending[pid] = pending
        self._send(publish)
        if not pending.event.wait(timeout):
            with self._state_lock:
                self._pending.pop(pid, None)
            raise ClientError(f"puback for {pid} not received within {timeout}s")
        if pending.error:
            raise pending.error

    def publish_async(self, topic: str, payload: bytes | str, retain: bool = False) -> int:
        """Pipelined qos-1 publish: returns the packet id immediately; the
        PubAck clears it from the unacked set (see wait_for_acks)."""
        TopicName(topic)
        if isinstance(payload, str):
            payload = payload.encode("utf-8")
        with self._state_lock:
            pid = self._alloc_pid()
            publish = pk.Publish(topic=topic, payload=payload, qos=1, retain=retain, packet_id=pid)
            self._unacked[pid] = publish
        self._send(publish)
        return pid

    def subscribe(self, topic_filter: str, qos: int = 1, timeout: float = 5.0) -> int:
        """Subscribe and return the granted qos. Remembered for reconnect()."""
        TopicFilter(topic_filter)
        if qos not in (0, 1):
            raise ValueError(f"qos {qos} outside the supported 0/1 subset")
        with self._state_lock:
            self._subscriptions[topic_filter] = qos
        codes = self._request_subscribe({topic_filter: qos}, timeout)
        return codes[0]

    def unsubscribe(self, topic_filter: str, timeout: float = 5.0) -> None:
        with self._state_lock:
            self._subscriptions.pop(topic_filter, None)
            pid = self._alloc_pid()
            pending = _Pending()
            self._pending[pid] = pending
        self._send(pk.Unsubscribe(packet_id=pid, topics=(topic_filter,)))
        if not pending.event.wait(timeout):
            raise ClientError("unsuback not received")
        if pending.error:
            raise pending.error

    def poll(self, timeout: float | None = None) -> InboundMessage | None:
        """Next inbound message, or None once ``timeout`` elapses."""
        deadline = None if timeout is None else time.monotonic() + timeout
        while True:
            remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
            if not self._connected.is_set() and self._inbound.empty():
                raise ConnectionLostError("connection lost")
            try:
                return self._inbound.get(timeout=min(0.05, remaining) if remaining is not None else 0.05)
            except Empty:
                if deadline is not None and time.monotonic() >= deadline:
                    return None

    def wait_for_acks(self, timeout: float = 10.0) -> bool:
        """True once every qos-1 publish (including retransmits) is acked."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self._state_lock:
                if not self._unacked:
                    return True
            time.sleep(0.01)
        with self._state_lock:
            return not self._unacked

    # -- internals -------------------------------------------------------------

    def _alloc_pid(self) -> int:
        for _ in range(0xFFFF):
            pid = self._next_pid
            self._next_pid = pid % 0xFFFF + 1
            if pid not in self._unacked and pid not in self._pending:
                return pid
        raise ClientError("no free packet ids")

    def _request_subscribe(self, topics: dict[str, int], timeout: float) -> tuple[int, ...]:
        with self._state_lock:
            pid = self._alloc_pid()
            pending = _Pending()
            self._pending[pid] = pending
        self._send(pk.Subscribe(packet_id=pid, topics=tuple(topics.items())))
        if not pending.event.wait(timeout):
            raise ClientError("suback not received")
        if pending.error:
            raise pending.error
        ack: pk.SubAck = pending.result
        if any(code == pk.SUBACK_FAILURE for code in ack.return_codes):
            raise ClientError(f"subscription refused: {ack.return_codes}")
        return ack.return_codes

    def _send(self, packet: pk.Packet) -> None:
        if not self._connected.is_set() or self._sock is None:
            raise ConnectionLostError("not connected")
        data = pk.encode_packet(packet)
        with self._send_lock:
            try:
                self._sock.sendall(data)
                self._last_send = time.monotonic()
            except OSError as exc:
                self._on_lost()
                raise ConnectionLostError(str(exc)) from None

    def _read_loop(self) -> None:
        sock = self._sock
        buffer = bytearray()
        try:
            while self._connected.is_set():
                self._maybe_ping()
                try:
                    chunk = sock.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not chunk:
                    break
                buffer.extend(chunk)
                while buffer:
                    decoded = pk.decode_packet(bytes(buffer))
                    if decoded is None:
                        break
                    packet, consumed = decoded
                    del buffer[:consumed]
                    self._dispatch(packet)
        except pk.ProtocolError as exc:
            logger.warning("protocol error from broker: %s", exc)
        except ClientError:
            pass
        finally:
            self._on_lost()

    def _maybe_ping(self) -> None:
        if not self.keepalive:
            return
        if time.monotonic() - self._last_send > self.keepalive * 0.6:
            try:
                self._send(pk.PingReq())
            except ClientError:
                pass

    def _dispatch(self, packet: pk.Packet) -> None:
        if isinstance(packet, pk.Publish):
            if packet.qos == 1:
                self._send(pk.PubAck(packet_id=packet.packet_id))
            self._inbound.put(
                InboundMessage(
                    topic=packet.topic,
                    payload=packet.payload,
                    qos=packet.qos,
                    retain=packet.retain,
                    dup=packet.dup,
                )
            )
        elif isinstance(packet, pk.ConnAck):
            if self._connack is not None:
                self._connack.result = packet
                self._connack.event.set()
        elif isinstance(packet, (pk.PubAck, pk.SubAck, pk.UnsubAck)):
            with self._state_lock:
                if isinstance(packet, pk.PubAck):
                    self._unacked.pop(packet.packet_id, None)
                pending = self._pending.pop(packet.packet_id, None)
            if pending is not None:
                pending.result = packet
                pending.event.set()
        elif isinstance(packet, pk.PingResp):
            pass
        else:
            raise pk.ProtocolError(f"{type(packet).__name__} not valid broker-to-client")

    def _on_lost(self) -> None:
        if not self._connected.is_set():
            return
        self._connected.clear()
        with self._state_lock:
            pending = list(self._pending.values())
            self._pending.clear()
            if self._connack is not None and not self._connack.event.is_set():
                pending.append(self._connack)
        for p in pending:
            p.error = ConnectionLostError("connection lost")
            p.event.set()

    def _shutdown_socket(self) -> None:
        self._connected.clear()
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._sock.close()
            except OSError:
                pass
