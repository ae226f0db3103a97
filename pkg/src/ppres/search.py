"""Golden-section maximisation of unimodal scalar functions."""
from __future__ import annotations

import math

from .errors import BracketError, DomainError

INV_PHI = (math.sqrt(5) - 1) / 2


def max_evaluations(width, tolerance):
    """Upper bound on oracle calls made by :func:`golden_max`."""
    return math.ceil(math.log(width / tolerance) / math.log(1 / INV_PHI)) + 2


def golden_max(func, lo, hi, tolerance, check_unimodal=True):
    """Maximise ``func`` on ``[lo, hi]`` to within ``tolerance`` in x.

    Never evaluates outside the interval.  Returns ``(x_best, f_best, calls)``
    where ``calls`` lists every ``(x, f(x))`` pair evaluated, in order.

    Raises :class:`BracketError` when the maximum collapses onto an interval
    end (no interior maximum) or when the sampled values are not unimodal.
    """
    if not (hi > lo):
        raise DomainError("empty search interval")
    if not (tolerance > 0):
        raise DomainError("tolerance must be > 0")
    calls = []

    def ev(x):
        y = func(x)
        calls.append((x, y))
        return y

    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = ev(c), ev(d)
    while (b - a) > tolerance:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = ev(d)
    x_best, f_best = (c, fc) if fc >= fd else (d, fd)

    if check_unimodal:
        if a == lo or b == hi:
            raise BracketError(f"maximum lies on the search boundary near {x_best:g}")
        ys = [y for _, y in sorted(calls)]
        k = max(range(len(ys)), key=ys.__getitem__)
        slack = 1e-12 * max(abs(y) for y in ys)
        rising = all(ys[i] <= ys[i + 1] + slack for i in range(k))
        falling = all(ys[i] + slack >= ys[i + 1] for i in range(k, len(ys) - 1))
        if not (rising and falling):
            raise BracketError("sampled response is not unimodal within the window")
    return x_best, f_best, calls
