"""xri: a desk-scale runtime for hybrid physical/virtual smart workstations.

Components: a minimal MQTT 3.1.1-subset message fabric (broker + client),
a shared domain vocabulary (context events, agent profiles, topic schema),
deterministic context detectors, an FSM agent runtime with a pomodoro-driven
workstation scenario, a WebSocket dashboard bridge, and the ``xri`` CLI.
"""

__version__ = "0.1.0"
