"""Universal pair-correlation functions of the Z-invariant Ising model.

A spin-pair correlation depends only on the modulus k and the multiset of
rapidities of the lines crossing between the two spins. Two functions are
tracked per k: G_low (the ordered model) and G_high (the disordered model).
Below criticality g = G_low and its dual g* = G_high; above, the roles swap.

The quadratic identities

    sc(u2-u1) sc(u4-u3) [G_low(1234R) G_low(R) - G_low(12R) G_low(34R)]
        + G_high(13R) G_high(24R) - G_high(14R) G_high(23R) = 0,

    k^2 sc(u2-u1) sc(u4-u3) [G_high(1234R) G_high(R) - G_high(12R) G_high(34R)]
        + G_low(13R) G_low(24R) - G_low(14R) G_low(23R) = 0,

(sc of modulus k', R an arbitrary even multiset) determine every value from
those with all rapidities equal or all but one equal. Those base cases are
computed here by embedding the rapidity pattern in a large rhombic lattice,
evaluating the Kac-Ward determinant at growing margins and extrapolating.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..elliptic import HIGH, LOW, EllipticParams
from ..errors import BaseCaseUnavailable, NotConverged, NumericallyIllConditioned
from .lattice import embedding_angles, rhombic_lattice
from .oracle import KacWard

DEFAULT_N_MAX = 12
SC_LIMIT = 1e8
_KEY_DIGITS = 10


def _other(fn):
    return HIGH if fn == LOW else LOW


@dataclass(frozen=True)
class RapidityMultiset:
    """Orientation-normalized rapidities of the lines crossing between two spins.

    Entries are reduced modulo 2 K(k') into the shortest window that holds
    them all; such a window is narrower than K(k') for any realizable pair.
    """

    entries: tuple

    @classmethod
    def normalized(cls, values, quarter_period):
        vals = np.sort(np.mod(np.asarray(values, dtype=float), 2.0 * quarter_period))
        if len(vals) % 2:
            raise ValueError(f"same-sublattice spins are separated by an even number of lines, got {len(vals)}")
        if len(vals) == 0:
            return cls(())
        gaps = np.diff(np.concatenate([vals, [vals[0] + 2.0 * quarter_period]]))
        cut = int(np.argmax(gaps))
        rot = np.concatenate([vals[cut + 1:], vals[:cut + 1] + 2.0 * quarter_period])
        rot = rot - rot[0]
        if rot[-1] >= quarter_period * (1 - 1e-12):
            raise ValueError("rapidities span a half-turn or more; not a realizable crossing set")
        return cls(tuple(float(x) for x in rot))

    @property
    def count(self):
        return len(self.entries)

    def key(self):
        """Translation-invariant memo key."""
        if not self.entries:
            return ()
        base = min(self.entries)
        return tuple(sorted(round(x - base, _KEY_DIGITS) for x in self.entries))


@dataclass
class BaseCaseFamily:
    """G(u^2n) or G(u^(2n-1) v) for n = 1..n_max, one regime function."""

    function: str
    offset: float          # v - u; 0 for the all-equal family
    values: np.ndarray     # index n - 1
    error: np.ndarray
    margins: tuple


def _aitken(a, b, c):
    den = (c - b) - (b - a)
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = c - (c - b) ** 2 / den
    return np.where(np.abs(den) > 1e-300, acc, c)


def embedded_family(k, function, offset_angle, n_max, margin):
    """Kac-Ward pair correlations for the patterns u^(2n-1) v, n = 1..n_max, at one margin.

    Angles in radians; offset_angle = 0 gives the all-equal patterns u^2n.
    """
    params = EllipticParams(k, function)
    pattern = [0.0] * (2 * n_max - 1) + [offset_angle]
    cols, rows = embedding_angles(pattern, margin)
    lat = rhombic_lattice(params, cols, rows, parity=0,
                          boundary="plus" if function == LOW else "free")
    kw = KacWard(lat)
    b = lat.index_of(margin + 2 * n_max, margin)
    return np.array([kw.pair_correlation(lat.index_of(margin + 2 * n_max - 2 * n, margin), b)
                     for n in range(1, n_max + 1)])


def embedded_value(params, rapidities, margin, function=None):
    """Kac-Ward pair correlation for one crossing pattern at one margin."""
    function = function or params.regime
    fp = EllipticParams(params.k, function)
    angles = np.asarray(rapidities, dtype=float) * math.pi / params.quarter_period
    cols, rows = embedding_angles(angles, margin)
    lat = rhombic_lattice(fp, cols, rows, parity=0,
                          boundary="plus" if function == LOW else "free")
    a = lat.index_of(margin, margin)
    b = lat.index_of(margin + len(angles), margin)
    return KacWard(lat).pair_correlation(a, b)


def extrapolate(evaluate, margins, tolerance):
    """Aitken extrapolation of evaluate(margin) over equally spaced margins.

    Stops once two successive extrapolants agree within ``tolerance``;
    returns (value, error_estimate, margins_used).
    """
    vals, used, prev = [], [], None
    for m in margins:
        vals.append(np.asarray(evaluate(m), dtype=float))
        used.append(m)
        if len(vals) < 3:
            continue
        acc = _aitken(*vals[-3:])
        if prev is not None:
            err = np.abs(acc - prev)
            if np.all(err <= tolerance):
                return acc, err, tuple(used)
        prev = acc
    if prev is None:
        raise NotConverged("need at least three margins", error_estimate=math.inf)
    err = np.abs(_aitken(*vals[-3:]) - prev) if len(vals) >= 4 else np.abs(vals[-1] - vals[-2])
    raise NotConverged(f"no convergence by margin {used[-1]} (error {float(np.max(err)):.2e})",
                       error_estimate=float(np.max(err)))


def base_cases(params, u, v, n_max=DEFAULT_N_MAX, tolerance=1e-9, margins=None,
               cap=DEFAULT_N_MAX):
    """Base-case families for the rapidity offset v - u in both regime functions.

    Returns {"g": (equal, one_off), "g*": (equal, one_off)} as BaseCaseFamily
    pairs, where g is the function of params.regime and g* its dual.
    """
    if n_max > cap:
        raise BaseCaseUnavailable(f"n_max={n_max} exceeds the configured cap {cap}")
    if margins is None:
        margins = tuple(range(16, 81, 4))
    d = (v - u) * math.pi / params.quarter_period
    out = {}
    for label, fn in (("g", params.regime), ("g*", _other(params.regime))):
        fams = []
        for off in (0.0, d):
            val, err, used = extrapolate(
                lambda m: embedded_family(params.k, fn, off, n_max, m), margins, tolerance)
            fams.append(BaseCaseFamily(fn, off * params.quarter_period / math.pi, val, err, used))
        out[label] = tuple(fams)
    return out


class CorrelationTable:
    """Memo of G_low and G_high values keyed by (function, k, multiset key).

    Base-case families are computed lazily, one lattice series per
    (function, k, offset), sized for ``n_max`` and reused for every n.
    """

    def __init__(self, n_max=DEFAULT_N_MAX, tolerance=1e-9, margins=None, sc_limit=SC_LIMIT):
        self.n_max = n_max
        self.tolerance = tolerance
        self.margins = margins or tuple(range(16, 81, 4))
        self.sc_limit = sc_limit
        self.values = {}
        self.families = {}
        self.max_base_error = 0.0

    @staticmethod
    def _kkey(k):
        return round(float(k), 14)

    def _family(self, fn, k, kp_quarter, offset):
        key = (fn, self._kkey(k), round(abs(offset), _KEY_DIGITS))
        fam = self.families.get(key)
        if fam is None:
            angle = abs(offset) * math.pi / kp_quarter
            val, err, used = extrapolate(
                lambda m: embedded_family(k, fn, angle, self.n_max, m), self.margins, self.tolerance)
            fam = BaseCaseFamily(fn, abs(offset), val, err, used)
            self.families[key] = fam
            self.max_base_error = max(self.max_base_error, float(np.max(err)))
        return fam

    def base_value(self, fn, params, offset, n):
        if n > self.n_max:
            raise BaseCaseUnavailable(f"base case with 2n={2 * n} exceeds n_max={self.n_max}")
        return float(self._family(fn, params.k, params.quarter_period, offset).values[n - 1])

    def evaluate(self, fn, params, entries):
        """G_fn at the multiset ``entries`` (already normalized)."""
        if not entries:
            return 1.0
        base = min(entries)
        key = tuple(sorted(round(x - base, _KEY_DIGITS) for x in entries))
        mkey = (fn, self._kkey(params.k), key)
        hit = self.values.get(mkey)
        if hit is not None:
            return hit
        val = self._compute(fn, params, key)
        self.values[mkey] = val
        return val

    def _compute(self, fn, params, s):
        counts = Counter(s)
        n = len(s) // 2
        if len(counts) == 1:
            return self.base_value(fn, params, 0.0, n)
        if len(counts) == 2:
            (a, ca), (b, cb) = sorted(counts.items(), key=lambda kv: -kv[1])
            if cb == 1:
                return self.base_value(fn, params, b - a, n)
        u1, u2, u3, u4, sc12, sc34 = self._choose_pairs(params, counts)
        rest = Counter(s)
        for x in (u1, u2, u3, u4):
            rest[x] -= 1
        r = list(rest.elements())
        g = lambda *extra: self.evaluate(fn, params, tuple(r) + extra)
        h = lambda *extra: self.evaluate(_other(fn), params, tuple(r) + extra)
        cross = h(u1, u3) * h(u2, u4) - h(u1, u4) * h(u2, u3)
        pref = sc12 * sc34 * (1.0 if fn == LOW else params.k ** 2)
        return (g(u1, u2) * g(u3, u4) - cross / pref) / g()

    def _choose_pairs(self, params, counts):
        """Two disjoint unequal pairs with the largest |sc sc| below the conditioning limit."""
        vals = sorted(counts)
        best = None
        for i, a in enumerate(vals):
            for b in vals[i + 1:]:
                left = counts.copy()
                left[a] -= 1
                left[b] -= 1
                rem = sorted(x for x, c in left.items() if c > 0)
                for j, c in enumerate(rem):
                    for d in rem[j + 1:]:
                        s1, s2 = params.sc(b - a), params.sc(d - c)
                        if abs(s1) > self.sc_limit or abs(s2) > self.sc_limit:
                            continue
                        score = abs(s1 * s2)
                        if best is None or score > best[0]:
                            best = (score, a, b, c, d, s1, s2)
        if best is None:
            raise NumericallyIllConditioned("every admissible pairing has an sc prefactor above the limit")
        return best[1:]


def g_correlation(table, params, rap, dual=False):
    """g (or g* with dual=True) at the crossing multiset ``rap``."""
    if not isinstance(rap, RapidityMultiset):
        rap = RapidityMultiset.normalized(rap, params.quarter_period)
    fn = params.regime if not dual else _other(params.regime)
    return table.evaluate(fn, params, rap.entries)


def toda_residuals(table, params, u1, u2, u3, u4, rest=()):
    """Residuals of both quadratic identities for the given rapidities."""
    r = tuple(rest)
    gl = lambda *x: table.evaluate(LOW, params, r + x)
    gh = lambda *x: table.evaluate(HIGH, params, r + x)
    sc2 = params.sc(u2 - u1) * params.sc(u4 - u3)
    first = sc2 * (gl(u1, u2, u3, u4) * gl() - gl(u1, u2) * gl(u3, u4)) \
        + gh(u1, u3) * gh(u2, u4) - gh(u1, u4) * gh(u2, u3)
    second = params.k ** 2 * sc2 * (gh(u1, u2, u3, u4) * gh() - gh(u1, u2) * gh(u3, u4)) \
        + gl(u1, u3) * gl(u2, u4) - gl(u1, u4) * gl(u2, u3)
    return first, second
