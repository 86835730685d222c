"""Deterministic 64-bit seed derivation for parallel Monte Carlo trials.

Per-trial and per-stream seeds are derived with the splitmix64 finalizer
(Steele, Lea, Flood 2014; the same mixer used by java.util.SplittableRandom)
over a golden-ratio increment. Streams derived this way are statistically
independent, and a trial's seed depends only on (base_seed, trial_index), so
results are identical no matter how trials are scheduled across workers.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

# 2^64 / golden ratio, the standard splitmix64 stream increment.
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_MIX_MUL_1 = 0xBF58476D1CE4E5B9
_MIX_MUL_2 = 0x94D049BB133111EB


def mix64(value: int) -> int:
    """splitmix64 finalizer: a bijective avalanche mix on 64-bit integers."""
    z = value & MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL_1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL_2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Seed for one trial: mix64(base_seed XOR golden-gamma * (index + 1))."""
    step = (GOLDEN_GAMMA * (trial_index + 1)) & MASK64
    return mix64((base_seed & MASK64) ^ step)


def stream_seed(seed: int, stream: int) -> int:
    """Sub-seed for an independent stream (labeled/unlabeled/... draws)."""
    step = (GOLDEN_GAMMA * (stream + 1)) & MASK64
    return mix64(((seed & MASK64) + step) & MASK64)
