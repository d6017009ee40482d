"""TCP proxy that kills the link after every Nth broker-to-client PubAck.

Sits between a publisher and the broker. It parses the broker-to-client byte
stream just enough to count PubAck packets (type nibble 4) and hard-drops
both sockets when the counter fires, which is exactly the window where a
qos-1 publish is routed but its ack is lost.
"""

from __future__ import annotations

import socket
import threading

from xri._kernels import varint_decode


class DropProxy:
    def __init__(self, upstream_host: str, upstream_port: int, drop_every: int = 10):
        self.upstream = (upstream_host, upstream_port)
        self.drop_every = drop_every
        self.pubacks_seen = 0
        self.drops = 0
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind(("127.0.0.1", 0))
        self._listener.listen(8)
        self._listener.settimeout(0.2)
        self.port = self._listener.getsockname()[1]
        self._stopping = threading.Event()
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        # every qos-1 PUBLISH observed client->broker: (packet_id, dup, payload)
        self.publishes_up: list[tuple[int, bool, bytes]] = []
        self._up_lock = threading.Lock()

    @property
    def address(self) -> str:
        return f"127.0.0.1:{self.port}"

    def start(self) -> "DropProxy":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        self._listener.close()
        self._thread.join(timeout=2)

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                client_sock, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            threading.Thread(
                target=self._bridge, args=(client_sock,), daemon=True
            ).start()

    def _bridge(self, client_sock: socket.socket) -> None:
        try:
            upstream_sock = socket.create_connection(self.upstream, timeout=2)
        except OSError:
            client_sock.close()
            return
        dead = threading.Event()

        def kill():
            if not dead.is_set():
                dead.set()
                self.drops += 1
                for s in (client_sock, upstream_sock):
                    try:
                        s.shutdown(socket.SHUT_RDWR)
                    except OSError:
                        pass
                    s.close()

        def forward_up():
            # client -> broker, forwarded as-is but framed to log publishes
            buffer = bytearray()
            try:
                while not dead.is_set():
                    data = client_sock.recv(65536)
                    if not data:
                        break
                    upstream_sock.sendall(data)
                    buffer.extend(data)
                    while True:
                        frame = self._frame_length(buffer)
                        if frame is None:
                            break
                        packet = bytes(buffer[:frame])
                        del buffer[:frame]
                        self._log_publish(packet)
            except OSError:
                pass
            kill()

        def forward_down():
            # broker -> client, counting pubacks frame by frame
            buffer = bytearray()
            try:
                while not dead.is_set():
                    data = upstream_sock.recv(65536)
                    if not data:
                        break
                    buffer.extend(data)
                    while True:
                        frame = self._frame_length(buffer)
                        if frame is None:
                            break
                        packet = bytes(buffer[:frame])
                        del buffer[:frame]
                        client_sock.sendall(packet)
                        if packet[0] >> 4 == 4:  # PubAck
                            self.pubacks_seen += 1
                            if self.pubacks_seen % self.drop_every == 0:
                                kill()
                                return
            except OSError:
                pass
            kill()

        threading.Thread(target=forward_up, daemon=True).start()
        forward_down()

    def _log_publish(self, packet: bytes) -> None:
        first = packet[0]
        if first >> 4 != 3 or not (first >> 1) & 0x03:  # qos-1 publish only
            return
        _, consumed = varint_decode(packet, 1)
        body = packet[1 + consumed :]
        topic_len = int.from_bytes(body[0:2], "big")
        pid_at = 2 + topic_len
        pid = int.from_bytes(body[pid_at : pid_at + 2], "big")
        with self._up_lock:
            self.publishes_up.append((pid, bool(first & 0x08), body[pid_at + 2 :]))

    @staticmethod
    def _frame_length(buffer: bytearray) -> int | None:
        if len(buffer) < 2:
            return None
        try:
            length, consumed = varint_decode(bytes(buffer), 1)
        except ValueError:
            return None
        if consumed == 0:
            return None
        total = 1 + consumed + length
        return total if len(buffer) >= total else None
