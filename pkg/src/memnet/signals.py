"""Periodic drive waveforms for external nodes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class Waveform(enum.Enum):
    SINE = "sine"
    COSINE = "cosine"
    SQUARE = "square"
    SAWTOOTH = "sawtooth"
    CONSTANT = "constant"


@dataclass(frozen=True)
class Signal:
    """One drive waveform: kind plus amplitude/frequency/phase/offset.

    frequency is in Hz, phase in radians. CONSTANT ignores frequency and
    phase and evaluates to amplitude + offset.
    """

    kind: Waveform
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    offset: float = 0.0

    @classmethod
    def sine(cls, amplitude, frequency, phase=0.0, offset=0.0):
        return cls(Waveform.SINE, amplitude, frequency, phase, offset)

    @classmethod
    def cosine(cls, amplitude, frequency, phase=0.0, offset=0.0):
        return cls(Waveform.COSINE, amplitude, frequency, phase, offset)

    @classmethod
    def square(cls, amplitude, frequency, phase=0.0, offset=0.0):
        return cls(Waveform.SQUARE, amplitude, frequency, phase, offset)

    @classmethod
    def sawtooth(cls, amplitude, frequency, phase=0.0, offset=0.0):
        return cls(Waveform.SAWTOOTH, amplitude, frequency, phase, offset)

    @classmethod
    def constant(cls, level):
        return cls(Waveform.CONSTANT, amplitude=level)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "amplitude": self.amplitude,
            "frequency": self.frequency,
            "phase": self.phase,
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Signal":
        try:
            kind = Waveform(data["kind"])
        except (KeyError, ValueError):
            raise ValueError(f"unknown waveform kind in {data!r}") from None
        return cls(
            kind,
            amplitude=float(data.get("amplitude", 0.0)),
            frequency=float(data.get("frequency", 0.0)),
            phase=float(data.get("phase", 0.0)),
            offset=float(data.get("offset", 0.0)),
        )


def evaluate(signal: Signal, t):
    """Evaluate a signal at time(s) t (scalar or array), in volts.

    Conventions: SQUARE takes the value +amplitude where the underlying sine
    is exactly zero (affects isolated samples only); SAWTOOTH rises linearly
    from -amplitude to +amplitude once per period, with the phase expressed
    as a fraction phase/(2*pi) of a period.
    """
    t_arr = np.asarray(t, dtype=float)
    a, f, ph, off = signal.amplitude, signal.frequency, signal.phase, signal.offset
    if signal.kind is Waveform.SINE:
        out = a * np.sin(2.0 * math.pi * f * t_arr + ph) + off
    elif signal.kind is Waveform.COSINE:
        out = a * np.cos(2.0 * math.pi * f * t_arr + ph) + off
    elif signal.kind is Waveform.SQUARE:
        s = np.sin(2.0 * math.pi * f * t_arr + ph)
        out = a * np.where(s >= 0.0, 1.0, -1.0) + off
    elif signal.kind is Waveform.SAWTOOTH:
        cycles = f * t_arr + ph / (2.0 * math.pi)
        out = a * (2.0 * (cycles - np.floor(cycles)) - 1.0) + off
    elif signal.kind is Waveform.CONSTANT:
        out = (a + off) * np.ones_like(t_arr)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unhandled waveform {signal.kind}")
    if out.ndim == 0:
        return float(out)
    return out
