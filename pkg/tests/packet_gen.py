"""Randomized valid-packet generator shared by the codec tests."""

from __future__ import annotations

import random

from xri.fabric import packets as pk

_TOPIC_CHARS = "abcdefghijklmnopqrstuvwxyz0123456789_-"


def random_topic(rng: random.Random, max_levels: int = 5) -> str:
    return "/".join(
        "".join(rng.choice(_TOPIC_CHARS) for _ in range(rng.randint(1, 8)))
        for _ in range(rng.randint(1, max_levels))
    )


def random_filter(rng: random.Random, max_levels: int = 5) -> str:
    levels = []
    for _ in range(rng.randint(1, max_levels)):
        roll = rng.random()
        if roll < 0.15:
            levels.append("+")
        else:
            levels.append("".join(rng.choice(_TOPIC_CHARS) for _ in range(rng.randint(1, 8))))
    if rng.random() < 0.2:
        levels.append("#")
    return "/".join(levels)


def random_packet(rng: random.Random) -> pk.Packet:
    kind = rng.randrange(11)
    if kind == 0:
        return pk.Connect(
            client_id="".join(rng.choice(_TOPIC_CHARS) for _ in range(rng.randint(1, 23))),
            keepalive=rng.randint(0, 0xFFFF),
            clean_session=rng.random() < 0.9,
        )
    if kind == 1:
        return pk.ConnAck(session_present=rng.random() < 0.5, return_code=rng.randint(0, 5))
    if kind == 2:
        qos = rng.randint(0, 1)
        return pk.Publish(
            topic=random_topic(rng),
            payload=rng.randbytes(rng.randint(0, 256)),
            qos=qos,
            retain=rng.random() < 0.3,
            dup=(qos == 1 and rng.random() < 0.2),
            packet_id=rng.randint(1, 0xFFFF) if qos else None,
        )
    if kind == 3:
        return pk.PubAck(packet_id=rng.randint(1, 0xFFFF))
    if kind == 4:
        return pk.Subscribe(
            packet_id=rng.randint(1, 0xFFFF),
            topics=tuple(
                (random_filter(rng), rng.randint(0, 1)) for _ in range(rng.randint(1, 4))
            ),
        )
    if kind == 5:
        return pk.SubAck(
            packet_id=rng.randint(1, 0xFFFF),
            return_codes=tuple(
                rng.choice((0, 1, pk.SUBACK_FAILURE)) for _ in range(rng.randint(1, 4))
            ),
        )
    if kind == 6:
        return pk.Unsubscribe(
            packet_id=rng.randint(1, 0xFFFF),
            topics=tuple(random_filter(rng) for _ in range(rng.randint(1, 4))),
        )
    if kind == 7:
        return pk.UnsubAck(packet_id=rng.randint(1, 0xFFFF))
    if kind == 8:
        return pk.PingReq()
    if kind == 9:
        return pk.PingResp()
    return pk.Disconnect()
