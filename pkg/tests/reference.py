"""Independent straight-line reference implementations.

These are deliberately naive re-derivations of every contract the package
implements: brute-force loops, list.insert, fractions-exact arithmetic.
Tests compare the package against these, never the package against itself.
"""
from fractions import Fraction
from math import comb

MULT = 6364136223846793005
INC = 1442695040888963407
MASK = (1 << 64) - 1
MIX_A = 0x9E3779B97F4A7C15
MIX_B = 0xBF58476D1CE4E5B9


def lcg_next(state):
    state = (MULT * state + INC) & MASK
    return state, state >> 32


def stream_start(seed, a, b):
    mixed = (seed ^ ((a * MIX_A) & MASK) ^ ((b * MIX_B) & MASK)) & MASK
    return lcg_next(mixed)[0]


def ref_draw(state, bound):
    state, word = lcg_next(state)
    return state, word % bound


def ref_shuffle_by_length(tokens, seed):
    items = list(tokens)
    state = stream_start(seed, len(items), 0)
    i = len(items) - 1
    while i >= 1:
        state, j = ref_draw(state, i + 1)
        items[i], items[j] = items[j], items[i]
        i -= 1
    return items


def ref_swap_even_odd(tokens):
    out = list(tokens)
    for i in range(1, len(out), 2):  # odd index swaps with its left neighbour
        out[i - 1], out[i] = out[i], out[i - 1]
    return out


def ref_switch(tokens):
    out = list(tokens)
    if len(out) >= 3:
        out[0], out[2] = out[2], out[0]
    return out


def ref_insert(tokens, pos, marker):
    out = list(tokens)
    out.insert(pos, marker)
    return out


def ref_reverse_partial(tokens, pos, marker):
    return list(tokens[:pos]) + [marker] + list(reversed(tokens[pos:]))


def ref_reverse_full(tokens, pos, marker):
    return list(reversed(ref_insert(tokens, pos, marker)))


def ref_hop_positions(tags, verb_tags, offset, length):
    positions = []
    for v, tag in enumerate(tags):
        if tag in verb_tags:
            p = v + offset
            positions.append(p if p <= length else length)
    return sorted(positions)


def ref_scatter(tokens, positions, marker):
    out = list(tokens)
    for p in sorted(positions, reverse=True):  # right-to-left keeps indices stable
        out.insert(p, marker)
    return out


def ref_undo_partial(tokens, marker):
    """Invert ref_reverse_partial given the marker is still in place."""
    i = list(tokens).index(marker)
    return list(tokens[:i]) + list(reversed(tokens[i + 1:]))


def ref_undo_full(tokens, marker):
    # reversing restores the marker-spliced original, so only the strip remains
    flipped = list(reversed(tokens))
    return [t for t in flipped if t != marker]


def ref_mean(xs):
    return sum(xs) / len(xs)


def ref_min_point(points):
    best = points[0]
    for step, ppl in points[1:]:
        if ppl < best[1]:
            best = (step, ppl)
    return best


def ref_trapezoid(steps, values):
    total = 0.0
    for i in range(len(steps) - 1):
        total += (steps[i + 1] - steps[i]) * (values[i] + values[i + 1]) / 2.0
    return total


def ref_variance(xs):
    mu = Fraction(sum(Fraction(x) for x in xs), len(xs))
    return float(sum((Fraction(x) - mu) ** 2 for x in xs) / (len(xs) - 1))


def ref_binomial_two_sided(k, n, p=0.5):
    """Exact-rational enumeration of all n+1 outcome probabilities."""
    fp = Fraction(p)
    probs = [comb(n, i) * fp ** i * (1 - fp) ** (n - i) for i in range(n + 1)]
    cutoff = probs[k] * (1 + Fraction(1, 10 ** 7))
    return float(sum(q for q in probs if q <= cutoff))
