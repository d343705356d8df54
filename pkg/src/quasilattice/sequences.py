"""One-dimensional quasiperiodic sequences.

Fibonacci numbers and words, Beatty difference sequences, the Kronecker
sequence {n x}, and the strip projection of Z^2 onto a line of irrational
slope.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyWindow

TAU = (1.0 + math.sqrt(5.0)) / 2.0

SHORT, LONG = "A", "B"


def fibonacci_numbers(count):
    """First ``count`` Fibonacci numbers, starting 1, 1."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = [1, 1][:count]
    while len(out) < count:
        out.append(out[-1] + out[-2])
    return out


def fibonacci_closed_form(n):
    """Binet's formula in floating point."""
    return (TAU ** n - (1.0 - TAU) ** n) / (TAU - (1.0 - TAU))


@dataclass(frozen=True)
class FibonacciWord:
    """Word over {A, B}; A is a unit piece, B a piece of length tau."""

    symbols: str
    generation: int

    def __len__(self):
        return len(self.symbols)

    def lengths(self):
        return [1.0 if s == SHORT else TAU for s in self.symbols]

    def positions(self):
        """Cumulative endpoints of the pieces, starting at 0."""
        return np.concatenate([[0.0], np.cumsum(self.lengths())])


def fibonacci_word(n):
    """F_1 = A, F_2 = B, F_{n+1} = F_n F_{n-1}."""
    if n < 1:
        raise ValueError("generation must be >= 1")
    prev, cur = SHORT, LONG
    if n == 1:
        return FibonacciWord(prev, 1)
    for _ in range(n - 2):
        prev, cur = cur, cur + prev
    return FibonacciWord(cur, n)


@dataclass(frozen=True)
class BeattySpec:
    theta: float
    gamma_shift: float = 0.0
    variant: str = "floor"

    def __post_init__(self):
        if self.variant not in ("floor", "ceil"):
            raise ValueError("variant must be 'floor' or 'ceil'")


def beatty_sequence(spec, n_from, n_to):
    """Terms n_from..n_to (inclusive) of the Beatty difference sequence."""
    if n_from > n_to:
        raise ValueError("n_from must not exceed n_to")
    rnd = math.floor if spec.variant == "floor" else math.ceil
    vals = [rnd(n * spec.theta + spec.gamma_shift) for n in range(n_from, n_to + 2)]
    return [b - a for a, b in zip(vals, vals[1:])]


def canonical_window(slope):
    """Width of the unit square projected perpendicular to direction (1, slope)."""
    return (1.0 + abs(slope)) / math.sqrt(1.0 + slope * slope)


def cut_and_project_1d(slope, window_width=None, range_=200, window_offset=None):
    """Project the points of Z^2 lying in a strip onto the line y = slope * x.

    The acceptance window is the half-open interval
    ``[window_offset, window_offset + window_width)`` of the perpendicular
    coordinate. Defaults: the canonical width, centred on the origin.
    Returns the sorted parallel coordinates.
    """
    if window_width is None:
        window_width = canonical_window(slope)
    if window_width <= 0:
        raise ValueError("window_width must be positive")
    if window_offset is None:
        window_offset = -0.5 * window_width
    norm = math.sqrt(1.0 + slope * slope)
    m, n = np.meshgrid(np.arange(-range_, range_ + 1), np.arange(-range_, range_ + 1), indexing="ij")
    perp = (n - slope * m) / norm
    inside = (perp >= window_offset) & (perp < window_offset + window_width)
    if not inside.any():
        raise EmptyWindow(f"no lattice point within the window for range {range_}")
    par = (m[inside] + slope * n[inside]) / norm
    return np.sort(par)


def gap_word(points, tol=1e-9):
    """Encode consecutive gaps as letters: the shorter gap -> A, the longer -> B.

    Returns (word, distinct_gap_values).
    """
    gaps = np.diff(np.asarray(points))
    values = []
    for g in np.sort(gaps):
        if not values or g - values[-1] > tol:
            values.append(g)
    if len(values) == 1:
        return SHORT * len(gaps), values
    if len(values) != 2:
        return None, values
    word = "".join(SHORT if abs(g - values[0]) <= tol else LONG for g in gaps)
    return word, values


@dataclass(frozen=True)
class KroneckerStats:
    fractions: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    max_deviation: float


def kronecker_stats(x, count, bins):
    """Histogram of {n x}, n = 1..count, and the largest bin-frequency deviation from 1/bins."""
    n = np.arange(1, count + 1, dtype=float)
    frac = np.mod(n * x, 1.0)
    counts, edges = np.histogram(frac, bins=bins, range=(0.0, 1.0))
    dev = float(np.max(np.abs(counts / count - 1.0 / bins)))
    return KroneckerStats(frac, edges, counts, dev)
