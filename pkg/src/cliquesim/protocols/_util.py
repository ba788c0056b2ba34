"""Shared integer-exact helpers for protocol parameter formulas."""

import math


def ceil_div(a, b):
    return -(-a // b)


def ceil_sqrt(x):
    """Smallest integer m with m*m >= x."""
    if x <= 0:
        return 0
    r = math.isqrt(x)
    return r if r * r == x else r + 1


def ceil_root_pow(n, num, den):
    """Smallest integer m with m**den >= n**num, i.e. ceil(n**(num/den)).

    Exact integer arithmetic; float rounding near integer powers would
    otherwise corrupt fanout schedules.
    """
    if n <= 0:
        return 0
    target = n ** num
    m = max(1, int(round(n ** (num / den))))
    while m ** den < target:
        m += 1
    while m > 1 and (m - 1) ** den >= target:
        m -= 1
    return m


def sample_ports(rng, nports, k):
    """k distinct ports from [1, nports], uniform, cheap for k << nports."""
    if k >= nports:
        return list(range(1, nports + 1))
    if k <= 0:
        return []
    rand = rng.random
    if 3 * k >= nports:
        pool = list(range(1, nports + 1))
        for i in range(k):
            j = i + int(rand() * (nports - i))
            if j >= nports:       # guard against float rounding at 1.0
                j = nports - 1
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
    out = []
    seen = set()
    add = seen.add
    while len(out) < k:
        x = int(rand() * nports) + 1
        if x <= nports and x not in seen:
            add(x)
            out.append(x)
    return out
