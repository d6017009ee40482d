"""WebSocket gateway between the message fabric and browser dashboards."""

from xri.bridge.server import DEFAULT_ALLOWLIST, Bridge

__all__ = ["Bridge", "DEFAULT_ALLOWLIST"]
