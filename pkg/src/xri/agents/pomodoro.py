"""Work/break cycle timing on the logical clock.

Phase changes land exactly on accumulated duration boundaries. With
auto_advance off the cycle parks at the boundary until a resume command.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Phase(Enum):
    WORK = "Work"
    BREAK = "Break"
    PAUSED = "PausedAtBoundary"


@dataclass(frozen=True)
class PomodoroConfig:
    work_duration_ms: int = 25 * 60_000
    break_duration_ms: int = 5 * 60_000
    auto_advance: bool = True

    def __post_init__(self):
        if self.work_duration_ms <= 0 or self.break_duration_ms <= 0:
            raise ValueError("pomodoro durations must be positive")


@dataclass(frozen=True)
class PomodoroState:
    phase: Phase = Phase.WORK
    phase_started_ms: int = 0
    next_phase: Phase | None = None  # only while paused

    def duration_ms(self, cfg: PomodoroConfig) -> int | None:
        if self.phase is Phase.WORK:
            return cfg.work_duration_ms
        if self.phase is Phase.BREAK:
            return cfg.break_duration_ms
        return None  # paused: no deadline


def _other(phase: Phase) -> Phase:
    return Phase.BREAK if phase is Phase.WORK else Phase.WORK


def pomodoro_advance(
    cfg: PomodoroConfig, state: PomodoroState, now_ms: int
) -> tuple[PomodoroState, list[tuple[int, Phase, PomodoroState]]]:
    """Advance to ``now_ms``, returning every boundary crossing as
    (boundary_ts, phase_before, state_after) so callers can walk the
    intermediate states."""
    transitions: list[tuple[int, Phase, PomodoroState]] = []
    while True:
        duration = state.duration_ms(cfg)
        if duration is None:
            break
        boundary = state.phase_started_ms + duration
        if now_ms < boundary:
            break
        if cfg.auto_advance:
            new = PomodoroState(phase=_other(state.phase), phase_started_ms=boundary)
        else:
            new = PomodoroState(
                phase=Phase.PAUSED, phase_started_ms=boundary, next_phase=_other(state.phase)
            )
        transitions.append((boundary, state.phase, new))
        state = new
    return state, transitions


def pomodoro_tick(cfg: PomodoroConfig, state: PomodoroState, now_ms: int) -> PomodoroState:
    """State after advancing the clock to ``now_ms``."""
    return pomodoro_advance(cfg, state, now_ms)[0]


def pomodoro_resume(
    cfg: PomodoroConfig, state: PomodoroState, now_ms: int
) -> tuple[PomodoroState, list[tuple[int, Phase, PomodoroState]]]:
    """Leave the paused-at-boundary state; the next phase starts at ``now_ms``."""
    if state.phase is not Phase.PAUSED:
        return state, []
    new = PomodoroState(phase=state.next_phase or Phase.WORK, phase_started_ms=now_ms)
    return new, [(now_ms, state.phase, new)]
