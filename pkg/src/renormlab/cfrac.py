"""Continued fractions: Gauss-map orbits, partial quotients, convergents.

Conventions for numbers in (0,1): alpha = [a0, a1, ...] means
alpha = 1/(a0 + 1/(a1 + ...)) with every quotient >= 1.  A rational input ends
its expansion at the last non-zero quotient and is marked ``terminated``.
"""
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .errors import NotEnoughQuotients, OutOfDomain, PrecisionExhausted
from .numerics import get_precision, mpf


@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple
    terminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "quotients", tuple(int(a) for a in self.quotients))
        if any(a < 1 for a in self.quotients):
            raise ValueError("partial quotients must be >= 1")
        if self.terminated and not self.quotients:
            raise ValueError("terminated expansion must keep its last quotient")

    def __len__(self):
        return len(self.quotients)

    def value(self):
        """Exact rational value of the (truncated) expansion."""
        v = Fraction(0)
        for a in reversed(self.quotients):
            v = Fraction(1, 1) / (a + v)
        return v


@dataclass(frozen=True)
class Convergents:
    p: tuple
    q: tuple


def gauss(alpha):
    """Fractional part of 1/alpha for alpha in (0,1).

    Snaps to exactly 0 when 1/alpha sits within 2^(16-b) of an integer, the
    canonical precision-loss point of the expansion.
    """
    alpha = mpf(alpha)
    if not (0 < alpha < 1):
        raise OutOfDomain("gauss needs 0 < alpha < 1, got %s" % alpha)
    inv = 1 / alpha
    near = gmpy2.rint(inv)
    if abs(inv - near) <= mpfr(2) ** (16 - get_precision()):
        return mpfr(0)
    return inv - gmpy2.floor(inv)


def cf_expand(alpha, depth):
    """First ``depth`` partial quotients of alpha in (0,1) along the Gauss orbit.

    Stops early (terminated=True) once an orbit point drops below 2^(-b/2) or
    1/alpha_i lands within 2^(-b/2) of an integer: past that point the input is
    a rational within working precision and further quotients would be noise.
    Early stop before reaching ``depth`` raises PrecisionExhausted carrying the
    partial expansion.
    """
    alpha = mpf(alpha)
    depth = int(depth)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not (0 < alpha < 1):
        raise OutOfDomain("cf_expand needs alpha in (0,1), got %s" % alpha)
    b = get_precision()
    floor_guard = mpfr(2) ** (-(b // 2))
    quotients = []
    x = alpha
    terminated = False
    while len(quotients) < depth:
        if x < floor_guard:
            terminated = True
            break
        inv = 1 / x
        near = gmpy2.rint(inv)
        if abs(inv - near) <= floor_guard:
            quotients.append(int(near))
            terminated = True
            break
        a = int(gmpy2.floor(inv))
        quotients.append(a)
        x = inv - a
    cf = ContinuedFraction(tuple(quotients), terminated)
    if terminated and len(quotients) < depth:
        raise PrecisionExhausted(
            "expansion ended after %d of %d quotients (rational within precision)"
            % (len(quotients), depth),
            partial=cf,
        )
    return cf


def convergents(cf, n):
    """Convergent numerators/denominators up to index n.

    q0 = 1, q1 = a0, and q_{k+1} = a_k q_k + q_{k-1}; p runs the same recursion
    from p0 = 0, p1 = 1.  Exact integer arithmetic.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > len(cf.quotients):
        raise NotEnoughQuotients(
            "need %d quotients, expansion has %d" % (n, len(cf.quotients))
        )
    p, q = [0], [1]
    prev_p, prev_q = 1, 0  # p_{-1}, q_{-1}
    for k in range(n):
        a = cf.quotients[k]
        p.append(a * p[-1] + prev_p)
        q.append(a * q[-1] + prev_q)
        prev_p, prev_q = p[-2], q[-2]
    return Convergents(tuple(p), tuple(q))


def is_bounded_type(cf, K):
    """True iff all partial quotients are <= K and the expansion did not end."""
    if not cf.quotients:
        raise ValueError("empty expansion")
    return (not cf.terminated) and max(cf.quotients) <= K


def cf_of_fraction(num, den):
    """Euclidean-algorithm expansion of a rational in (0,1); testing oracle."""
    if not (0 < num < den):
        raise OutOfDomain("need 0 < num/den < 1")
    quotients = []
    a, b = den, num
    while b:
        quotients.append(a // b)
        a, b = b, a % b
    return ContinuedFraction(tuple(quotients), terminated=True)
