"""Pure-Python perturbation kernels.

Fallback for :mod:`perturblab._speedups`; both expose the same functions and
must produce bit-identical results (tests enforce this). The generator is a
64-bit linear congruence: state' = (MULTIPLIER * state + INCREMENT) mod 2^64,
and each draw yields the high 32 bits of the new state. Draws below a bound
use a plain modulo; the bias is negligible for sentence-length bounds.
"""
from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
STREAM_MIX_A = 0x9E3779B97F4A7C15
STREAM_MIX_B = 0xBF58476D1CE4E5B9
_MASK64 = (1 << 64) - 1


def lcg_step(state: int) -> int:
    return (MULTIPLIER * state + INCREMENT) & _MASK64


def seed_state(seed: int, a: int, b: int) -> int:
    """Derive the state of stream (a, b) under ``seed``: mix, then advance once."""
    state = seed ^ ((a * STREAM_MIX_A) & _MASK64) ^ ((b * STREAM_MIX_B) & _MASK64)
    return lcg_step(state & _MASK64)


def draw(state: int, bound: int) -> tuple[int, int]:
    """Advance the state and return (new_state, value in [0, bound))."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    state = lcg_step(state)
    return state, (state >> 32) % bound


def permutation(state: int, n: int) -> tuple[int, list[int]]:
    """Fisher-Yates permutation of [0, n), consuming n-1 draws."""
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        state, j = draw(state, i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return state, perm


def shuffle_by_length(tokens, seed: int) -> list:
    """Shuffle a sentence with a stream keyed only by its length.

    Equal-length sentences therefore receive the identical permutation.
    """
    work = list(tokens)
    state = seed_state(seed, len(work), 0)
    for i in range(len(work) - 1, 0, -1):
        state, j = draw(state, i + 1)
        work[i], work[j] = work[j], work[i]
    return work


def swap_adjacent(tokens) -> list:
    """Swap each even-indexed token with its successor; odd trailing token stays."""
    work = list(tokens)
    for i in range(0, len(work) - 1, 2):
        work[i], work[i + 1] = work[i + 1], work[i]
    return work


def swap_first_third(tokens) -> list:
    """Exchange tokens 0 and 2; identity on sentences shorter than 3 tokens."""
    work = list(tokens)
    if len(work) >= 3:
        work[0], work[2] = work[2], work[0]
    return work


def splice_marker(tokens, pos: int, marker: str) -> list:
    """Insert the marker so it occupies index ``pos``; order otherwise unchanged."""
    work = list(tokens)
    return work[:pos] + [marker] + work[pos:]


def reverse_tail(tokens, pos: int, marker: str) -> list:
    """Marker at ``pos``, suffix after it reversed."""
    work = list(tokens)
    return work[:pos] + [marker] + work[pos:][::-1]


def reverse_whole(tokens, pos: int, marker: str) -> list:
    """Full reversal of the marker-spliced sentence."""
    return splice_marker(tokens, pos, marker)[::-1]


def scatter_markers(tokens, positions, marker: str) -> list:
    """Insert one marker per position (original index space, sorted ascending).

    A position equal to len(tokens) appends at the end; duplicates insert
    multiple markers at the same spot.
    """
    out = []
    k = 0
    n_pos = len(positions)
    for i, token in enumerate(tokens):
        while k < n_pos and positions[k] == i:
            out.append(marker)
            k += 1
        out.append(token)
    while k < n_pos:
        out.append(marker)
        k += 1
    return out
