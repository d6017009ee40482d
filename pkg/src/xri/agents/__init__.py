"""Agent runtime: FSM hybrid-object agents and the workstation scenario."""

from xri.agents.clock import ClockMode, LogicalClock
from xri.agents.machine import (
    AgentInstance,
    AgentSpec,
    Condition,
    ConfigError,
    PublishState,
    Rule,
    step,
)
from xri.agents.plant import plant_avatar_policy
from xri.agents.pomodoro import Phase, PomodoroConfig, PomodoroState, pomodoro_advance, pomodoro_resume, pomodoro_tick
from xri.agents.scenario import Scenario, ScenarioConfig, run_scenario
from xri.agents.situation import classify_situation

__all__ = [
    "LogicalClock",
    "ClockMode",
    "AgentSpec",
    "AgentInstance",
    "Condition",
    "Rule",
    "PublishState",
    "ConfigError",
    "step",
    "plant_avatar_policy",
    "PomodoroConfig",
    "PomodoroState",
    "Phase",
    "pomodoro_tick",
    "pomodoro_advance",
    "pomodoro_resume",
    "classify_situation",
    "Scenario",
    "ScenarioConfig",
    "run_scenario",
]
