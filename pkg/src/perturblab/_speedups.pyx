# cython: language_level=3
"""Compiled perturbation kernels.

Mirror of perturblab._kernels_py; same functions, bit-identical outputs.
The 64-bit congruence wraps naturally in C, so no masking is needed.
"""

from libc.stdint cimport uint64_t

cdef uint64_t MUL = 6364136223846793005UL
cdef uint64_t INC = 1442695040888963407UL
cdef uint64_t MIX_A = 0x9E3779B97F4A7C15UL
cdef uint64_t MIX_B = 0xBF58476D1CE4E5B9UL

MULTIPLIER = MUL
INCREMENT = INC
STREAM_MIX_A = MIX_A
STREAM_MIX_B = MIX_B


cdef inline uint64_t _step(uint64_t state) nogil:
    return MUL * state + INC


cdef inline uint64_t _draw(uint64_t *state, uint64_t bound) nogil:
    state[0] = _step(state[0])
    return (state[0] >> 32) % bound


def lcg_step(state):
    return _step(<uint64_t> state)


def seed_state(seed, a, b):
    """Derive the state of stream (a, b) under ``seed``: mix, then advance once."""
    cdef uint64_t s = (<uint64_t> seed) ^ ((<uint64_t> a) * MIX_A) ^ ((<uint64_t> b) * MIX_B)
    return _step(s)


def draw(state, bound):
    """Advance the state and return (new_state, value in [0, bound))."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    cdef uint64_t s = <uint64_t> state
    cdef uint64_t value = _draw(&s, <uint64_t> bound)
    return s, value


def permutation(state, n):
    """Fisher-Yates permutation of [0, n), consuming n-1 draws."""
    cdef uint64_t s = <uint64_t> state
    cdef Py_ssize_t i, j
    cdef list perm = list(range(n))
    cdef object tmp
    for i in range(<Py_ssize_t> n - 1, 0, -1):
        j = <Py_ssize_t> _draw(&s, <uint64_t> (i + 1))
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return s, perm


def shuffle_by_length(tokens, seed):
    """Shuffle a sentence with a stream keyed only by its length."""
    cdef list work = list(tokens)
    cdef Py_ssize_t n = len(work)
    cdef uint64_t s = seed_state(seed, n, 0)
    cdef Py_ssize_t i, j
    cdef object tmp
    for i in range(n - 1, 0, -1):
        j = <Py_ssize_t> _draw(&s, <uint64_t> (i + 1))
        tmp = work[i]
        work[i] = work[j]
        work[j] = tmp
    return work


def swap_adjacent(tokens):
    """Swap each even-indexed token with its successor; odd trailing token stays."""
    cdef list work = list(tokens)
    cdef Py_ssize_t n = len(work)
    cdef Py_ssize_t i
    cdef object tmp
    for i in range(0, n - 1, 2):
        tmp = work[i]
        work[i] = work[i + 1]
        work[i + 1] = tmp
    return work


def swap_first_third(tokens):
    """Exchange tokens 0 and 2; identity on sentences shorter than 3 tokens."""
    cdef list work = list(tokens)
    cdef object tmp
    if len(work) >= 3:
        tmp = work[0]
        work[0] = work[2]
        work[2] = tmp
    return work


def splice_marker(tokens, pos, marker):
    """Insert the marker so it occupies index ``pos``; order otherwise unchanged."""
    cdef Py_ssize_t n = len(tokens)
    cdef Py_ssize_t p = <Py_ssize_t> pos
    cdef list out = [None] * (n + 1)
    cdef Py_ssize_t i
    for i in range(p):
        out[i] = tokens[i]
    out[p] = marker
    for i in range(p, n):
        out[i + 1] = tokens[i]
    return out


def reverse_tail(tokens, pos, marker):
    """Marker at ``pos``, suffix after it reversed."""
    cdef Py_ssize_t n = len(tokens)
    cdef Py_ssize_t p = <Py_ssize_t> pos
    cdef list out = [None] * (n + 1)
    cdef Py_ssize_t i
    for i in range(p):
        out[i] = tokens[i]
    out[p] = marker
    for i in range(p, n):
        out[p + 1 + (n - 1 - i)] = tokens[i]
    return out


def reverse_whole(tokens, pos, marker):
    """Full reversal of the marker-spliced sentence."""
    cdef list spliced = splice_marker(tokens, pos, marker)
    spliced.reverse()
    return spliced


def scatter_markers(tokens, positions, marker):
    """Insert one marker per position (original index space, sorted ascending)."""
    cdef Py_ssize_t n = len(tokens)
    cdef Py_ssize_t n_pos = len(positions)
    cdef list out = []
    cdef Py_ssize_t i, k = 0
    for i in range(n):
        while k < n_pos and <Py_ssize_t> positions[k] == i:
            out.append(marker)
            k += 1
        out.append(tokens[i])
    while k < n_pos:
        out.append(marker)
        k += 1
    return out
