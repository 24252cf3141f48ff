"""Prescheduled output events and a sample-accurate queue.

An event is issued on the first output tick whose time is at or after its
issue time. Its physical effect follows one channel latency later.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

CHANNELS = ("audio", "tactile")


@dataclass(eq=False)
class ScheduledEvent:
    channel: str
    intended_onset: float  # s, when the physical effect should happen
    issue_time: float  # s, intended_onset - channel latency
    amplitude: float = 1.0
    latency: float = 0.0  # s, channel output latency
    late: bool = False
    fired_at: float | None = None
    cancelled: bool = False
    seq: int = -1

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")

    @property
    def physical_onset(self) -> float | None:
        return None if self.fired_at is None else self.fired_at + self.latency

    @property
    def deficit(self) -> float:
        """How far the physical onset trails the intended onset (s)."""
        if self.fired_at is None:
            return 0.0
        return self.physical_onset - self.intended_onset


@dataclass
class EventQueue:
    _heap: list = field(default_factory=list)
    _counter: itertools.count = field(default_factory=itertools.count)
    fired: list = field(default_factory=list)

    def schedule(self, event: ScheduledEvent, now: float) -> ScheduledEvent:
        """Queue an event; one whose issue time has already passed is flagged late."""
        if event.issue_time < now:
            event.late = True
        event.seq = next(self._counter)
        heapq.heappush(self._heap, (event.issue_time, event.seq, event))
        return event

    def cancel(self, event: ScheduledEvent) -> None:
        if event.fired_at is None:
            event.cancelled = True

    def due_events(self, t: float) -> list[ScheduledEvent]:
        """Pop every live event with issue_time <= t, in (issue_time, insertion) order."""
        out = []
        while self._heap and self._heap[0][0] <= t:
            _, _, ev = heapq.heappop(self._heap)
            if ev.cancelled:
                continue
            ev.fired_at = t
            out.append(ev)
            self.fired.append(ev)
        return out

    def pending(self) -> list[ScheduledEvent]:
        return sorted((e for _, _, e in self._heap if not e.cancelled),
                      key=lambda e: (e.issue_time, e.seq))

    def __len__(self) -> int:
        return sum(1 for _, _, e in self._heap if not e.cancelled)


def schedule(queue: EventQueue, event: ScheduledEvent, now: float) -> ScheduledEvent:
    return queue.schedule(event, now)


def due_events(queue: EventQueue, t: float) -> list[ScheduledEvent]:
    return queue.due_events(t)
