import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xri.fabric.broker import Broker, BrokerConfig
from xri.fabric.client import Client


@pytest.fixture
def broker():
    b = Broker(port=0)
    b.start()
    yield b
    b.stop()


@pytest.fixture
def make_client(broker):
    clients = []

    def factory(client_id: str, keepalive: int = 30) -> Client:
        client = Client(client_id, keepalive=keepalive)
        client.connect(broker.address)
        clients.append(client)
        return client

    yield factory
    for client in clients:
        try:
            client.disconnect()
        except Exception:
            pass
