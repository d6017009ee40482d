"""Publish-subscribe message fabric: an MQTT 3.1.1-subset broker and client.

QoS 0 and 1 only, clean sessions, retained messages; no QoS 2, no wills,
no auth, no TLS.
"""

from xri.fabric.broker import Broker, BrokerConfig
from xri.fabric.client import Client, ConnectionLostError, InboundMessage
from xri.fabric.packets import (
    ConnAck,
    Connect,
    Disconnect,
    EncodingLimitError,
    PingReq,
    PingResp,
    ProtocolError,
    PubAck,
    Publish,
    SubAck,
    Subscribe,
    UnsubAck,
    Unsubscribe,
    decode_packet,
    encode_packet,
)
from xri.fabric.topics import TopicFilter, TopicName, topic_matches

__all__ = [
    "Broker",
    "BrokerConfig",
    "Client",
    "ConnectionLostError",
    "InboundMessage",
    "Connect",
    "ConnAck",
    "Publish",
    "PubAck",
    "Subscribe",
    "SubAck",
    "Unsubscribe",
    "UnsubAck",
    "PingReq",
    "PingResp",
    "Disconnect",
    "ProtocolError",
    "EncodingLimitError",
    "encode_packet",
    "decode_packet",
    "TopicName",
    "TopicFilter",
    "topic_matches",
]
