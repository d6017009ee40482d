"""Benchmarks: fabric publish-to-deliver latency, and compiled-vs-pure kernels."""

from __future__ import annotations

import json
import statistics
import threading
import time

from xri.fabric.broker import Broker
from xri.fabric.client import Client

BENCH_TOPIC = "xri/bench/stream"


def _percentile(sorted_values: list[float], q: float) -> float:
    if not sorted_values:
        return float("nan")
    index = min(len(sorted_values) - 1, max(0, round(q * (len(sorted_values) - 1))))
    return sorted_values[index]


def latency_bench(
    broker_address: str | None = None,
    subscribers: int = 10,
    rate: float = 1000.0,
    messages: int = 3000,
    payload_pad: int = 64,
    qos: int = 1,
) -> dict:
    """Publish ``messages`` at ``rate`` msg/s to ``subscribers`` subscribers
    on loopback; returns latency percentiles in milliseconds.

    Each payload carries its send time on the shared monotonic clock; every
    subscriber records receive-minus-send.
    """
    embedded = None
    if broker_address is None:
        embedded = Broker(port=0)
        embedded.start()
        broker_address = embedded.address

    latencies_ms: list[float] = []
    lock = threading.Lock()
    done = threading.Event()
    expected_total = subscribers * messages
    received = [0]

    def consume(client: Client) -> None:
        from xri.fabric.client import ConnectionLostError

        while True:
            try:
                msg = client.poll(timeout=5.0)
            except ConnectionLostError:
                return
            if msg is None:
                return
            now = time.monotonic_ns()
            sent = json.loads(msg.payload)["t"]
            with lock:
                latencies_ms.append((now - sent) / 1e6)
                received[0] += 1
                if received[0] >= expected_total:
                    done.set()
                    return

    subs = []
    threads = []
    try:
        for i in range(subscribers):
            sub = Client(f"bench-sub-{i}")
            sub.connect(broker_address)
            sub.subscribe(BENCH_TOPIC, qos=qos)
            subs.append(sub)
        for sub in subs:
            thread = threading.Thread(target=consume, args=(sub,), daemon=True)
            thread.start()
            threads.append(thread)

        pub = Client("bench-pub")
        pub.connect(broker_address)
        pad = "x" * payload_pad
        interval = 1.0 / rate
        start = time.monotonic()
        for i in range(messages):
            target = start + i * interval
            delay = target - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            payload = json.dumps({"i": i, "t": time.monotonic_ns(), "pad": pad})
            if qos == 1:
                pub.publish_async(BENCH_TOPIC, payload)  # acks complete in the background
            else:
                pub.publish(BENCH_TOPIC, payload, qos=0)
        elapsed = time.monotonic() - start
        done.wait(timeout=30.0)
        if qos == 1:
            assert pub.wait_for_acks(timeout=10.0), "publisher acks missing"
        pub.disconnect()
    finally:
        for sub in subs:
            sub.disconnect()
        for thread in threads:
            thread.join(timeout=1.0)
        if embedded is not None:
            embedded.stop()

    latencies_ms.sort()
    return {
        "messages": messages,
        "subscribers": subscribers,
        "qos": qos,
        "target_rate_hz": rate,
        "achieved_rate_hz": round(messages / elapsed, 1) if elapsed else None,
        "delivered": received[0],
        "expected": expected_total,
        "p50_ms": round(_percentile(latencies_ms, 0.50), 3),
        "p90_ms": round(_percentile(latencies_ms, 0.90), 3),
        "p99_ms": round(_percentile(latencies_ms, 0.99), 3),
        "max_ms": round(latencies_ms[-1], 3) if latencies_ms else None,
    }


def _time_op(fn, *args, repeat: int) -> float:
    start = time.perf_counter_ns()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter_ns() - start) / repeat


def kernel_bench(repeat: int = 20_000, frame_pixels: int = 64 * 48) -> dict:
    """ns/op for each hot kernel, pure Python vs the compiled extension."""
    from xri._kernels import pure

    impls = {"pure": pure}
    try:
        from xri._kernels import _speedups

        impls["compiled"] = _speedups
    except ImportError:
        pass

    frame_a = bytes((i * 7) % 256 for i in range(frame_pixels))
    frame_b = bytes((i * 11 + 40) % 256 for i in range(frame_pixels))
    cases = {
        "varint_encode": lambda m: m.varint_encode(268_435_455),
        "varint_decode": lambda m: m.varint_decode(b"\xff\xff\xff\x7f", 0),
        "topic_matches": lambda m: m.topic_matches("xri/context/+/cam0/#", "xri/context/desk1/cam0/presence"),
        "count_diff_pixels": lambda m: m.count_diff_pixels(frame_a, frame_b, 25),
        "pixel_sum": lambda m: m.pixel_sum(frame_a),
    }
    pixel_repeat = max(1, repeat // 40)  # frame kernels are ~3 orders heavier
    results: dict = {"repeat": repeat, "frame_pixels": frame_pixels, "kernels": {}}
    for name, op in cases.items():
        per_impl = {}
        n = pixel_repeat if name in ("count_diff_pixels", "pixel_sum") else repeat
        for impl_name, module in impls.items():
            per_impl[impl_name] = round(_time_op(lambda m=module: op(m), repeat=n), 1)
        if "compiled" in per_impl and per_impl["compiled"]:
            per_impl["speedup"] = round(per_impl["pure"] / per_impl["compiled"], 1)
        results["kernels"][name] = per_impl
    return results
