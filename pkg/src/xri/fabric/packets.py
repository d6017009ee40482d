"""MQTT 3.1.1-subset wire codec.

Layout per packet: fixed header (type nibble + flags nibble), remaining-length
varint (1-4 bytes, 7 data bits per byte, high bit continues), then the
kind-specific variable header and payload. Big-endian 16-bit lengths and
packet-ids, UTF-8 strings with a 16-bit length prefix.

The codec is canonical: ``encode_packet(decode_packet(b)) == b`` for every
accepted input. Anything outside the subset (QoS 2, wills, auth) is rejected
at decode with :class:`ProtocolError`.
"""

from __future__ import annotations

from dataclasses import dataclass

from xri._kernels import VARINT_MAX, varint_decode, varint_encode

PROTOCOL_NAME = "MQTT"
PROTOCOL_LEVEL = 4

CONNECT = 1
CONNACK = 2
PUBLISH = 3
PUBACK = 4
SUBSCRIBE = 8
SUBACK = 9
UNSUBSCRIBE = 10
UNSUBACK = 11
PINGREQ = 12
PINGRESP = 13
DISCONNECT = 14

SUBACK_FAILURE = 0x80

# ConnAck return codes (MQTT 3.1.1 table 3.1)
CONNACK_ACCEPTED = 0
CONNACK_BAD_PROTOCOL_VERSION = 1
CONNACK_IDENTIFIER_REJECTED = 2


class ProtocolError(Exception):
    """Malformed or out-of-subset wire data; the connection must be closed."""


class BadProtocolVersionError(ProtocolError):
    """CONNECT with a protocol level other than 4 (MQTT 3.1.1)."""


class EncodingLimitError(ValueError):
    """Packet body exceeds the 268,435,455-byte remaining-length limit."""


@dataclass(frozen=True)
class Connect:
    client_id: str
    keepalive: int = 60
    clean_session: bool = True


@dataclass(frozen=True)
class ConnAck:
    session_present: bool = False
    return_code: int = CONNACK_ACCEPTED


@dataclass(frozen=True)
class Publish:
    topic: str
    payload: bytes = b""
    qos: int = 0
    retain: bool = False
    dup: bool = False
    packet_id: int | None = None


@dataclass(frozen=True)
class PubAck:
    packet_id: int


@dataclass(frozen=True)
class Subscribe:
    packet_id: int
    # (topic filter, requested qos) pairs, at least one
    topics: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class SubAck:
    packet_id: int
    return_codes: tuple[int, ...]  # granted qos, or 0x80 for failure


@dataclass(frozen=True)
class Unsubscribe:
    packet_id: int
    topics: tuple[str, ...]


@dataclass(frozen=True)
class UnsubAck:
    packet_id: int


@dataclass(frozen=True)
class PingReq:
    pass


@dataclass(frozen=True)
class PingResp:
    pass


@dataclass(frozen=True)
class Disconnect:
    pass


Packet = (
    Connect
    | ConnAck
    | Publish
    | PubAck
    | Subscribe
    | SubAck
    | Unsubscribe
    | UnsubAck
    | PingReq
    | PingResp
    | Disconnect
)


def _encode_string(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"string too long for 16-bit length prefix: {len(raw)}")
    return len(raw).to_bytes(2, "big") + raw


def _check_packet_id(pid: int) -> int:
    if not 1 <= pid <= 0xFFFF:
        raise ValueError(f"packet id out of range: {pid}")
    return pid


def _frame(packet_type: int, flags: int, body: bytes) -> bytes:
    if len(body) > VARINT_MAX:
        raise EncodingLimitError(f"packet body of {len(body)} bytes exceeds {VARINT_MAX}")
    return bytes([(packet_type << 4) | flags]) + varint_encode(len(body)) + body


def encode_packet(packet: Packet) -> bytes:
    """Serialize one packet to its exact wire bytes."""
    if isinstance(packet, Connect):
        if not 0 <= packet.keepalive <= 0xFFFF:
            raise ValueError(f"keepalive out of range: {packet.keepalive}")
        flags = 0x02 if packet.clean_session else 0x00
        body = (
            _encode_string(PROTOCOL_NAME)
            + bytes([PROTOCOL_LEVEL, flags])
            + packet.keepalive.to_bytes(2, "big")
            + _encode_string(packet.client_id)
        )
        return _frame(CONNECT, 0, body)

    if isinstance(packet, ConnAck):
        if not 0 <= packet.return_code <= 5:
            raise ValueError(f"connack return code out of range: {packet.return_code}")
        body = bytes([1 if packet.session_present else 0, packet.return_code])
        return _frame(CONNACK, 0, body)

    if isinstance(packet, Publish):
        if packet.qos not in (0, 1):
            raise ValueError(f"qos {packet.qos} outside the supported 0/1 subset")
        if packet.qos == 0 and packet.packet_id is not None:
            raise ValueError("qos-0 publish must not carry a packet id")
        if packet.qos == 0 and packet.dup:
            raise ValueError("dup flag requires qos 1")
        flags = (0x08 if packet.dup else 0) | (packet.qos << 1) | (0x01 if packet.retain else 0)
        body = _encode_string(packet.topic)
        if packet.qos == 1:
            if packet.packet_id is None:
                raise ValueError("qos-1 publish requires a packet id")
            body += _check_packet_id(packet.packet_id).to_bytes(2, "big")
        body += packet.payload
        return _frame(PUBLISH, flags, body)

    if isinstance(packet, PubAck):
        return _frame(PUBACK, 0, _check_packet_id(packet.packet_id).to_bytes(2, "big"))

    if isinstance(packet, Subscribe):
        if not packet.topics:
            raise ValueError("subscribe requires at least one topic filter")
        body = _check_packet_id(packet.packet_id).to_bytes(2, "big")
        for topic, qos in packet.topics:
            if qos not in (0, 1):
                raise ValueError(f"requested qos {qos} outside the supported 0/1 subset")
            body += _encode_string(topic) + bytes([qos])
        return _frame(SUBSCRIBE, 0x02, body)

    if isinstance(packet, SubAck):
        if not packet.return_codes:
            raise ValueError("suback requires at least one return code")
        body = _check_packet_id(packet.packet_id).to_bytes(2, "big")
        for code in packet.return_codes:
            if code not in (0, 1, SUBACK_FAILURE):
                raise ValueError(f"suback return code invalid: {code}")
            body += bytes([code])
        return _frame(SUBACK, 0, body)

    if isinstance(packet, Unsubscribe):
        if not packet.topics:
            raise ValueError("unsubscribe requires at least one topic filter")
        body = _check_packet_id(packet.packet_id).to_bytes(2, "big")
        for topic in packet.topics:
            body += _encode_string(topic)
        return _frame(UNSUBSCRIBE, 0x02, body)

    if isinstance(packet, UnsubAck):
        return _frame(UNSUBACK, 0, _check_packet_id(packet.packet_id).to_bytes(2, "big"))

    if isinstance(packet, PingReq):
        return _frame(PINGREQ, 0, b"")
    if isinstance(packet, PingResp):
        return _frame(PINGRESP, 0, b"")
    if isinstance(packet, Disconnect):
        return _frame(DISCONNECT, 0, b"")

    raise TypeError(f"not a packet: {packet!r}")


class _Cursor:
    """Sequential reader over one packet body."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ProtocolError("packet body shorter than its declared fields")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def string(self) -> str:
        raw = self.take(self.u16())
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError(f"invalid UTF-8 string: {exc}") from None
        if "\x00" in text:
            raise ProtocolError("U+0000 not allowed in strings")
        return text

    def rest(self) -> bytes:
        chunk = self.data[self.pos :]
        self.pos = len(self.data)
        return chunk

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.data)


def _decode_connect(flags: int, body: _Cursor) -> Connect:
    if flags != 0:
        raise ProtocolError(f"connect fixed-header flags must be 0, got {flags:#x}")
    name = body.string()
    if name != PROTOCOL_NAME:
        raise ProtocolError(f"unknown protocol name {name!r}")
    level = body.u8()
    if level != PROTOCOL_LEVEL:
        raise BadProtocolVersionError(f"protocol level {level} unsupported")
    connect_flags = body.u8()
    if connect_flags & 0x01:
        raise ProtocolError("connect reserved flag bit set")
    if connect_flags & 0xFC:
        raise ProtocolError("will/username/password flags outside the supported subset")
    keepalive = body.u16()
    client_id = body.string()
    return Connect(client_id=client_id, keepalive=keepalive, clean_session=bool(connect_flags & 0x02))


def _decode_publish(flags: int, body: _Cursor) -> Publish:
    qos = (flags >> 1) & 0x03
    if qos == 3:
        raise ProtocolError("publish qos bits 0b11 are malformed")
    if qos == 2:
        raise ProtocolError("qos 2 outside the supported subset")
    dup = bool(flags & 0x08)
    if dup and qos == 0:
        raise ProtocolError("dup flag set on a qos-0 publish")
    topic = body.string()
    packet_id = None
    if qos == 1:
        packet_id = body.u16()
        if packet_id == 0:
            raise ProtocolError("qos-1 publish with packet id 0")
    return Publish(
        topic=topic,
        payload=body.rest(),
        qos=qos,
        retain=bool(flags & 0x01),
        dup=dup,
        packet_id=packet_id,
    )


def _require_flags(flags: int, expected: int, kind: str) -> None:
    if flags != expected:
        raise ProtocolError(f"{kind} fixed-header flags must be {expected:#x}, got {flags:#x}")


def _nonzero_pid(pid: int, kind: str) -> int:
    if pid == 0:
        raise ProtocolError(f"{kind} with packet id 0")
    return pid


def decode_packet(data: bytes, max_size: int | None = None) -> tuple[Packet, int] | None:
    """Decode exactly one packet from the head of ``data``.

    Returns ``(packet, bytes_consumed)``, or ``None`` when ``data`` is an
    incomplete prefix (nothing consumed). Raises :class:`ProtocolError` for
    malformed or out-of-subset input, which requires closing the connection.
    """
    if len(data) == 0:
        return None
    first = data[0]
    packet_type = first >> 4
    flags = first & 0x0F
    if packet_type == 0 or packet_type == 15:
        raise ProtocolError(f"reserved packet type {packet_type}")
    if packet_type in (5, 6, 7):
        raise ProtocolError("qos-2 flow packets outside the supported subset")

    try:
        length, consumed = varint_decode(data, 1)
    except ValueError as exc:
        raise ProtocolError(f"remaining length: {exc}") from None
    if consumed == 0:
        return None
    total = 1 + consumed + length
    if max_size is not None and total > max_size:
        raise ProtocolError(f"packet of {total} bytes exceeds the {max_size}-byte limit")
    if len(data) < total:
        return None

    body = _Cursor(bytes(data[1 + consumed : total]))

    if packet_type == CONNECT:
        packet: Packet = _decode_connect(flags, body)
    elif packet_type == CONNACK:
        _require_flags(flags, 0, "connack")
        ack_flags = body.u8()
        if ack_flags & 0xFE:
            raise ProtocolError("connack acknowledge flags reserved bits set")
        code = body.u8()
        if code > 5:
            raise ProtocolError(f"connack return code {code} undefined")
        packet = ConnAck(session_present=bool(ack_flags & 0x01), return_code=code)
    elif packet_type == PUBLISH:
        packet = _decode_publish(flags, body)
    elif packet_type == PUBACK:
        _require_flags(flags, 0, "puback")
        packet = PubAck(packet_id=_nonzero_pid(body.u16(), "puback"))
    elif packet_type == SUBSCRIBE:
        _require_flags(flags, 0x02, "subscribe")
        pid = _nonzero_pid(body.u16(), "subscribe")
        topics = []
        while not body.exhausted:
            topic = body.string()
            qos = body.u8()
            if qos > 1:
                raise ProtocolError(f"requested qos {qos} outside the supported subset")
            topics.append((topic, qos))
        if not topics:
            raise ProtocolError("subscribe with no topic filters")
        packet = Subscribe(packet_id=pid, topics=tuple(topics))
    elif packet_type == SUBACK:
        _require_flags(flags, 0, "suback")
        pid = _nonzero_pid(body.u16(), "suback")
        codes = []
        while not body.exhausted:
            code = body.u8()
            if code not in (0, 1, SUBACK_FAILURE):
                raise ProtocolError(f"suback return code {code:#x} outside the supported subset")
            codes.append(code)
        if not codes:
            raise ProtocolError("suback with no return codes")
        packet = SubAck(packet_id=pid, return_codes=tuple(codes))
    elif packet_type == UNSUBSCRIBE:
        _require_flags(flags, 0x02, "unsubscribe")
        pid = _nonzero_pid(body.u16(), "unsubscribe")
        topics = []
        while not body.exhausted:
            topics.append(body.string())
        if not topics:
            raise ProtocolError("unsubscribe with no topic filters")
        packet = Unsubscribe(packet_id=pid, topics=tuple(topics))
    elif packet_type == UNSUBACK:
        _require_flags(flags, 0, "unsuback")
        packet = UnsubAck(packet_id=_nonzero_pid(body.u16(), "unsuback"))
    elif packet_type == PINGREQ:
        _require_flags(flags, 0, "pingreq")
        packet = PingReq()
    elif packet_type == PINGRESP:
        _require_flags(flags, 0, "pingresp")
        packet = PingResp()
    else:  # DISCONNECT
        _require_flags(flags, 0, "disconnect")
        packet = Disconnect()

    if not body.exhausted:
        raise ProtocolError(
            f"{type(packet).__name__.lower()} carries {len(body.data) - body.pos} trailing bytes"
        )
    return packet, total
