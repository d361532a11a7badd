"""Canvas events: UserMoved for every update, UserClicked on dwell.

A click fires when the mapped position repeats click_count times in a row
at the same integral pixel (five in the reference configuration). The
repetition counter resets after firing, so a user standing still produces
one click per full dwell window rather than a click storm: a run of n
identical positions yields floor(n / click_count) clicks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator

from ..core import ConfigError

DEFAULT_CLICK_COUNT = 5


class EventKind(enum.Enum):
    USER_MOVED = "UserMoved"
    USER_CLICKED = "UserClicked"


@dataclass(frozen=True)
class AppEvent:
    kind: EventKind
    canvas_position: tuple[int, int]
    sequence_number: int


class ClickDetector:
    """Stateful UserMoved/UserClicked generator over a pixel stream."""

    def __init__(self, click_count: int = DEFAULT_CLICK_COUNT):
        if click_count < 1:
            raise ConfigError("click_count must be >= 1")
        self.click_count = click_count
        self._last: tuple[int, int] | None = None
        self._run = 0
        self._seq = 0

    def feed(self, pixel: tuple[int, int]) -> list[AppEvent]:
        """Events for one received canvas position, in emission order."""
        pixel = (int(pixel[0]), int(pixel[1]))
        self._seq += 1
        events = [AppEvent(EventKind.USER_MOVED, pixel, self._seq)]
        if pixel == self._last:
            self._run += 1
        else:
            self._last = pixel
            self._run = 1
        if self._run >= self.click_count:
            self._seq += 1
            events.append(AppEvent(EventKind.USER_CLICKED, pixel, self._seq))
            self._run = 0
        return events

    @property
    def dwell_progress(self) -> float:
        """Fraction of the click window accumulated at the current pixel."""
        return self._run / self.click_count


def generate_events(
    pixels: Iterable[tuple[int, int]], click_count: int = DEFAULT_CLICK_COUNT
) -> Iterator[AppEvent]:
    """Event stream for a canvas position stream (stateless convenience)."""
    detector = ClickDetector(click_count)
    for pixel in pixels:
        yield from detector.feed(pixel)
