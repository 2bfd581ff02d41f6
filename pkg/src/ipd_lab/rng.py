"""PCG64 (XSL-RR 128/64) random number generator.

This is the 128-bit LCG with the XSL-RR output function from O'Neill's PCG
family, the same bit generator numpy ships as ``PCG64``. Seeding follows the
reference ``pcg_setseq_128_srandom_r``: the state starts at 0, the increment is
``(stream << 1) | 1``, and the seed is added between two LCG steps. Each output
is taken from the state *after* advancing.

A seed maps to exactly one stream of 64-bit outputs on every platform; the
compiled kernels reimplement the same recurrence.
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
MASK128 = (1 << 128) - 1
MULTIPLIER = 0x2360ED051FC65DA44385DF649FCCF645
DEFAULT_STREAM = 0xDA3E39CB94B95BDB

# 2**-53, maps the top 53 bits of an output to [0, 1)
_TWO_M53 = 1.0 / (1 << 53)


def seed_state(seed: int, stream: int = DEFAULT_STREAM) -> tuple[int, int]:
    """Return ``(state, inc)`` for an integer seed and stream selector."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    inc = ((stream << 1) | 1) & MASK128
    state = inc  # one step from state 0
    state = (state + (seed & MASK128)) & MASK128
    state = (state * MULTIPLIER + inc) & MASK128
    return state, inc


def _xsl_rr(state: int) -> int:
    rot = state >> 122
    x = ((state >> 64) ^ state) & MASK64
    return ((x >> rot) | (x << ((-rot) & 63))) & MASK64


class PCG64:
    """Pure-Python PCG64 stream."""

    def __init__(self, seed: int = 0, stream: int = DEFAULT_STREAM):
        self.state, self.inc = seed_state(seed, stream)

    def next_u64(self) -> int:
        self.state = (self.state * MULTIPLIER + self.inc) & MASK128
        return _xsl_rr(self.state)

    def next_double(self) -> float:
        """Uniform double in [0, 1) built from the top 53 bits."""
        return (self.next_u64() >> 11) * _TWO_M53

    def split_state(self) -> tuple[int, int, int, int]:
        """State and increment as (hi, lo) 64-bit halves, for the C kernel."""
        return (self.state >> 64, self.state & MASK64, self.inc >> 64, self.inc & MASK64)
