"""Closest returns, dynamical partitions, refinement structure, real bounds.

Everything here lives on the circle R/Z but is computed on the lift through
the orbit of the base point; windings are tracked explicitly so no fractional
part is ever taken of a nearly-integer difference.
"""
import csv
from dataclasses import dataclass, field

import gmpy2
from gmpy2 import mpfr

from . import kernel
from .errors import LevelsNotConsecutive, OutOfDomain, PrecisionExhausted
from .numerics import mpf, precision


@dataclass(frozen=True)
class ReturnTimes:
    q: tuple        # closest-return iterate counts q_0, q_1, ...
    p: tuple        # windings: F^{q_n}(x) - x - p_n in (-1,1), sign (-1)^n
    offsets: tuple  # the signed return offsets themselves


@dataclass(frozen=True)
class Interval:
    """Circle arc [left, left+length] with left in [0,1), 0 < length < 1."""
    left: object
    length: object

    @property
    def right(self):
        return self.left + self.length


@dataclass(frozen=True)
class DynamicalPartition:
    level: int
    base_point: object
    long_intervals: tuple   # (iterate index i, Interval) for f^i(I_n)
    short_intervals: tuple  # (iterate index j, Interval) for f^j(I_{n+1})
    spec: object = field(repr=False, default=None)

    def all_intervals(self):
        rows = [("long", i, iv) for i, iv in self.long_intervals]
        rows += [("short", j, iv) for j, iv in self.short_intervals]
        rows.sort(key=lambda r: r[2].left)
        return rows


def _proj(x):
    return x - gmpy2.floor(x)


def _orbit_point(spec, k):
    if len(spec._orbit0) <= k:
        spec.orbit_of_zero(max(k, 2 * (len(spec._orbit0) - 1)))
    return spec._orbit0[k]


def closest_returns(spec, x, n_max):
    """Closest-return times of the orbit of x by direct iteration.

    q_0 = 1 with the winding putting the first offset in (0,1).  Given two
    consecutive returns, the candidate times q_{n-1} + j*q_n walk from the
    q_{n-1}-side return point towards x (these are the intermediate fractions
    of the rotation number); q_{n+1} is the last candidate before the walk
    crosses to the other side of x.  That crossing index is pure orbit-order
    data, hence conjugacy-invariant: unlike raw Euclidean return distances it
    matches the continued-fraction recursion for critical maps as well.
    """
    n_max = int(n_max)
    with precision(spec.precision_bits):
        x = mpf(x)
        if x != 0:
            raise OutOfDomain("closest returns are computed at the marked point 0")
        underflow = mpfr(2) ** (16 - spec.precision_bits)
        if spec._returns is not None and len(spec._returns.q) > n_max:
            rt = spec._returns
            return ReturnTimes(rt.q[: n_max + 1], rt.p[: n_max + 1],
                               rt.offsets[: n_max + 1])

        def offset(k, pk):
            return _orbit_point(spec, k) - pk

        f1 = _orbit_point(spec, 1)
        p0 = int(gmpy2.floor(f1))
        e0 = f1 - p0
        qs, ps, es = [1], [p0], [e0]
        # phantom previous return (q, p) = (0, 1): offset -1, the left endpoint
        prev_q, prev_p, prev_e = 0, 1, mpfr(-1)
        while len(qs) <= n_max:
            qn, pn, en = qs[-1], ps[-1], es[-1]
            j = 1
            while True:
                t = prev_q + j * qn
                w = prev_p + j * pn
                e = offset(t, w)
                if abs(e) < underflow:
                    raise PrecisionExhausted(
                        "return offset underflow at iterate %d" % t,
                        partial=ReturnTimes(tuple(qs), tuple(ps), tuple(es)))
                if (e < 0) != (prev_e < 0):
                    break
                last = (t, w, e)
                j += 1
            if j == 1:
                raise PrecisionExhausted(
                    "return ladder broke at level %d" % len(qs),
                    partial=ReturnTimes(tuple(qs), tuple(ps), tuple(es)))
            qs.append(last[0])
            ps.append(last[1])
            es.append(last[2])
            prev_q, prev_p, prev_e = qn, pn, en
        rt = ReturnTimes(tuple(qs), tuple(ps), tuple(es))
        if spec._returns is None or len(spec._returns.q) < len(rt.q):
            spec._returns = rt
        return rt


def build_partition(spec, x, n):
    """Level-n dynamical partition of the circle at base point x.

    Long intervals are f^i(I_n) for 0 <= i < q_{n+1}, short ones f^j(I_{n+1})
    for 0 <= j < q_n; they tile the circle with disjoint interiors.  The base
    point must be the marked critical point 0, where the orbit cache lives.
    """
    if mpf(x) != 0:
        raise OutOfDomain("partitions are built at the marked point 0")
    with precision(spec.precision_bits):
        rt = closest_returns(spec, 0, n + 1)
        qn, qn1 = rt.q[n], rt.q[n + 1]
        orbit = spec.orbit_of_zero(qn + qn1)

        def arc(level, i):
            a = orbit[i]
            w = orbit[i + rt.q[level]] - a - rt.p[level]
            left = a if w > 0 else a + w
            return Interval(_proj(left), abs(w))

        longs = tuple((i, arc(n, i)) for i in range(qn1))
        shorts = tuple((j, arc(n + 1, j)) for j in range(qn))
        return DynamicalPartition(n, mpfr(0), longs, shorts, spec)


def covering_defect(part):
    """(worst endpoint gap of the sorted tiling, total-length defect)."""
    rows = part.all_intervals()
    worst = mpfr(0)
    total = mpfr(0)
    for idx, (_k, _i, iv) in enumerate(rows):
        total += iv.length
        nxt = rows[(idx + 1) % len(rows)][2]
        gap = abs(_proj(iv.right) - nxt.left)
        worst = max(worst, min(gap, abs(1 - gap)))
    return worst, abs(total - 1)


@dataclass(frozen=True)
class RefinementReport:
    ok: bool
    pieces_per_long: int
    worst_mismatch: object
    failures: tuple


def _arc_gap(u, v):
    g = abs(u - v)
    return min(g, abs(1 - g))


def refinement_check(part_n, part_n1):
    """Verify the refinement structure between consecutive partition levels.

    Each long interval of P_n splits into exactly a_{n+1} longs of P_{n+1}
    plus one short of P_{n+1}; each short of P_n reappears verbatim as a long
    of P_{n+1}.  Returns pass/fail and the worst endpoint mismatch.
    """
    if (part_n1.level != part_n.level + 1
            or part_n.base_point != part_n1.base_point
            or part_n.spec is not part_n1.spec):
        raise LevelsNotConsecutive(
            "need consecutive levels of one partition family, got %d and %d"
            % (part_n.level, part_n1.level))
    spec = part_n.spec
    with precision(spec.precision_bits):
        n = part_n.level
        rt = closest_returns(spec, 0, n + 2)
        qn, qn1, qn2 = rt.q[n], rt.q[n + 1], rt.q[n + 2]
        a_next = (qn2 - qn) // qn1
        tol = mpfr(2) ** (-(spec.precision_bits // 2))
        worst = mpfr(0)
        failures = []
        longs1 = dict(part_n1.long_intervals)
        shorts1 = dict(part_n1.short_intervals)
        for i, iv in part_n.long_intervals:
            pieces = [shorts1[i]]
            pieces += [longs1[i + qn + j * qn1] for j in range(a_next)]
            mismatch = abs(sum(p.length for p in pieces) - iv.length)
            chain = sorted(pieces, key=lambda p: p.left)
            start = min(range(len(chain)),
                        key=lambda t: _arc_gap(chain[t].left, iv.left))
            chain = chain[start:] + chain[:start]
            pos = iv.left
            for p in chain:
                mismatch = max(mismatch, _arc_gap(_proj(pos), p.left))
                pos = p.right
            worst = max(worst, mismatch)
            if mismatch > tol:
                failures.append(("long", i, mismatch))
        for j, iv in part_n.short_intervals:
            g = max(_arc_gap(iv.left, longs1[j].left),
                    abs(iv.length - longs1[j].length))
            worst = max(worst, g)
            if g > tol:
                failures.append(("short", j, g))
        return RefinementReport(not failures, a_next + 1, worst, tuple(failures))


def _fundamental_clean(spec, part, pts):
    """True when I_n u I_{n+1} at the base contains no other critical point."""
    others = [p for p in pts if p != 0]
    if not others:
        return True
    fund = [part.long_intervals[0][1], part.short_intervals[0][1]]
    for p in others:
        for iv in fund:
            if _proj(p - iv.left) < iv.length:
                return False
    return True


def commensurability(spec, c, n_range):
    """C(n) = worst adjacent-interval length ratio of P_n(c) per level.

    Returns a list of (n, C(n), pre_asymptotic); pre_asymptotic flags levels
    whose fundamental intervals still contain another critical point (the
    real-bounds constant is only expected to stabilize past those).
    """
    with precision(spec.precision_bits):
        c = mpf(c)
        pts = spec.critical_points()
        if pts and not any(p == c for p in pts):
            raise OutOfDomain("base point %s is not a critical point" % c)
        if c != 0:
            raise OutOfDomain("partitions are built at the marked point 0")
        out = []
        for n in n_range:
            part = build_partition(spec, 0, n)
            rows = part.all_intervals()
            worst = mpfr(1)
            for idx in range(len(rows)):
                a = rows[idx][2].length
                b = rows[(idx + 1) % len(rows)][2].length
                worst = max(worst, a / b, b / a)
            out.append((n, worst, not _fundamental_clean(spec, part, pts)))
        return out


def first_clean_level(spec, n_limit=24):
    """Smallest level whose fundamental intervals at 0 avoid other critical points."""
    pts = spec.critical_points()
    for n in range(1, n_limit):
        part = build_partition(spec, 0, n)
        if _fundamental_clean(spec, part, pts):
            return n
    raise PrecisionExhausted("no clean level below %d" % n_limit)


def export_partition_csv(part, path):
    """One row per interval: level, type, index, endpoints, length."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "type", "index", "left", "right", "length"])
        for kind, i, iv in part.all_intervals():
            w.writerow([part.level, kind, i, str(iv.left),
                        str(_proj(iv.right)), str(iv.length)])
