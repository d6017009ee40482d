"""Shipped demo: the smart-workstation scenario and its sensor script."""

from pathlib import Path

_HERE = Path(__file__).parent


def scenario_path() -> Path:
    return _HERE / "scenario.json"


def script_path() -> Path:
    return _HERE / "demo_script.jsonl"
