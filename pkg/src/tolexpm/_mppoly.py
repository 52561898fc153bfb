"""Ascending-coefficient polynomial helpers over mpmath numbers."""
from __future__ import annotations

from fractions import Fraction

import mpmath as mp


def to_mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def add(*polys):
    n = max(len(p) for p in polys)
    out = [mp.mpf(0)] * n
    for p in polys:
        for i, c in enumerate(p):
            out[i] += c
    return out


def scale(p, c):
    return [c * x for x in p]


def mul(a, b):
    out = [mp.mpf(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def divmod_(a, b):
    """Quotient and remainder of a / b with deg(remainder) < deg(b)."""
    a = [mp.mpf(x) for x in a]
    b = trim(b)
    db = len(b) - 1
    if len(a) - 1 < db:
        return [mp.mpf(0)], a
    q = [mp.mpf(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / b[db]
        q[i - db] = c
        for j in range(db + 1):
            a[i - db + j] -= c * b[j]
    return q, a[:db] if db > 0 else [mp.mpf(0)]


def evaluate(p, x):
    acc = mp.mpf(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc
