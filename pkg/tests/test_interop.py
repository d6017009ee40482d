"""Broker conformance against an independent third-party MQTT 3.1.1 client.

The client under tests/third_party/ is a stripped-down derivative of Eclipse
paho-mqtt: its wire implementation was written against the MQTT spec, not
against this broker. Checklist covered here:

  1. connect / connack
  2. wildcard subscribe ('#' and '+') with suback
  3. receive qos-0 and qos-1 publishes (with automatic puback)
  4. publish qos 0 and qos 1 (puback observed via on_publish)
  5. retained message delivered on subscribe with retain=1
  6. clean disconnect
"""

import threading
import time

import pytest

import third_party.upahomqtt as mqtt
from xri.fabric.client import Client

mqtt.DEBUG_PC = False  # runtime switch for the client's debug prints


class ThirdPartyClient:
    """Wraps the vendored client with our own pump thread (its loop_start
    targets MicroPython and is not used)."""

    def __init__(self, client_id: str):
        self.client = mqtt.Client(client_id=client_id, protocol=mqtt.MQTTv311)
        self.messages = []
        self.published_mids = []
        self.subscribed = threading.Event()
        self.connected = threading.Event()
        self.client.on_message = lambda c, u, m: self.messages.append(
            (m.topic if isinstance(m.topic, str) else m.topic.decode(), bytes(m.payload), m.qos, m.retain)
        )
        self.client.on_publish = lambda c, u, mid: self.published_mids.append(mid)
        self.client.on_subscribe = lambda c, u, mid, granted: self.subscribed.set()
        self.client.on_connect = lambda c, u, f, rc: self.connected.set()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._pump, daemon=True)

    def connect(self, host: str, port: int) -> None:
        rc = self.client.connect(host, port, keepalive=10)
        assert rc == 0
        self._thread.start()
        assert self.connected.wait(3), "no connack from the broker"

    def _pump(self):
        while not self._stop.is_set():
            self.client.loop(timeout=0.1)

    def wait_messages(self, n: int, timeout: float = 3.0) -> list:
        deadline = time.monotonic() + timeout
        while len(self.messages) < n and time.monotonic() < deadline:
            time.sleep(0.02)
        return list(self.messages)

    def close(self):
        try:
            self.client.disconnect()
        except Exception:
            pass
        self._stop.set()
        self._thread.join(timeout=2)


@pytest.fixture
def third_party(broker):
    tp = ThirdPartyClient("third-party-conformance")
    tp.connect(broker.host, broker.port)
    yield tp
    tp.close()


def test_connect_and_wildcard_subscribe(third_party):
    result, mid = third_party.client.subscribe("xri/interop/#", qos=1)
    assert result == mqtt.MQTT_ERR_SUCCESS
    assert third_party.subscribed.wait(3), "no suback"


def test_receives_qos0_and_qos1_with_wildcards(broker, make_client, third_party):
    third_party.client.subscribe("xri/interop/+/data", qos=1)
    assert third_party.subscribed.wait(3)
    ours = make_client("ours")
    ours.publish("xri/interop/a/data", b"at-most-once", qos=0)
    ours.publish("xri/interop/b/data", b"at-least-once", qos=1)
    messages = third_party.wait_messages(2)
    assert ("xri/interop/a/data", b"at-most-once", 0, False) in messages
    assert ("xri/interop/b/data", b"at-least-once", 1, False) in messages


def test_third_party_publishes_reach_our_subscriber(broker, make_client, third_party):
    ours = make_client("ours")
    ours.subscribe("xri/interop/up/#", qos=1)
    third_party.client.publish("xri/interop/up/q0", b"zero", qos=0)
    info = third_party.client.publish("xri/interop/up/q1", b"one", qos=1)
    got = {}
    for _ in range(2):
        message = ours.poll(timeout=3)
        assert message is not None
        got[message.topic] = message.payload
    assert got == {"xri/interop/up/q0": b"zero", "xri/interop/up/q1": b"one"}
    deadline = time.monotonic() + 3
    while not third_party.published_mids and time.monotonic() < deadline:
        time.sleep(0.02)
    assert third_party.published_mids, "qos-1 publish never acknowledged"


def test_retained_message_delivered_on_subscribe(broker, make_client, third_party):
    ours = make_client("ours")
    ours.publish("xri/interop/retained/x", b"remembered", qos=1, retain=True)
    third_party.client.subscribe("xri/interop/retained/+", qos=1)
    messages = third_party.wait_messages(1)
    assert messages[0][0] == "xri/interop/retained/x"
    assert messages[0][1] == b"remembered"
    assert messages[0][3] == 1  # retain flag set on catch-up delivery


def test_clean_disconnect(broker, third_party):
    third_party.client.disconnect()
    time.sleep(0.3)
    assert broker.metrics()["clients"] == 0
