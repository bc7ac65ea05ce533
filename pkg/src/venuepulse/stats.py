"""Spearman rank correlation with a two-tailed p-value."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import betainc

from .corpus import VenuePulseError


class LengthMismatch(VenuePulseError, ValueError):
    pass


class DegenerateInput(VenuePulseError, ValueError):
    pass


@dataclass(frozen=True)
class SpearmanResult:
    r: float
    p: float
    n: int
    tie_adjusted: bool


def rank(values: Sequence[float]) -> list[float]:
    """Ascending ranks starting at 1; tied values share the mean of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def t_two_tailed(t: float, df: int) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom.

    Uses the identity P = I_x(df/2, 1/2) with x = df / (df + t^2).
    """
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return float(min(1.0, max(0.0, betainc(df / 2.0, 0.5, x))))


def _pearson(a: Sequence[float], b: Sequence[float]) -> float:
    n = len(a)
    ma, mb = sum(a) / n, sum(b) / n
    sab = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    saa = sum((x - ma) ** 2 for x in a)
    sbb = sum((y - mb) ** 2 for y in b)
    return sab / math.sqrt(saa * sbb)


def _check(x: Sequence[float], y: Sequence[float]) -> int:
    if len(x) != len(y):
        raise LengthMismatch(f"len(x)={len(x)} != len(y)={len(y)}")
    n = len(x)
    if n < 3:
        raise DegenerateInput(f"need at least 3 points, got {n}")
    if len(set(x)) == 1 or len(set(y)) == 1:
        raise DegenerateInput("constant input; correlation undefined")
    return n


def spearman(x: Sequence[float], y: Sequence[float]) -> SpearmanResult:
    n = _check(x, y)
    rx, ry = rank(x), rank(y)
    ties = len(set(x)) < n or len(set(y)) < n
    if ties:
        r = _pearson(rx, ry)
    else:
        d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
        r = 1.0 - 6.0 * d2 / (n * (n * n - 1))
    r = max(-1.0, min(1.0, r))
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        p = t_two_tailed(t, n - 2)
    return SpearmanResult(r=r, p=p, n=n, tie_adjusted=ties)


def permutation_p(x: Sequence[float], y: Sequence[float], max_n: int = 10) -> float:
    """Exact two-tailed p by enumerating every permutation of ``y``'s ranks.

    Counts permutations whose |r| is at least the observed |r|. Feasible for
    n <= 10 (10! orderings).
    """
    n = _check(x, y)
    if n > max_n:
        raise ValueError(f"exact permutation test limited to n <= {max_n}")
    rx, ry = rank(x), rank(y)
    mx = sum(rx) / n
    cx = [a - mx for a in rx]
    my = sum(ry) / n
    cy = [b - my for b in ry]
    denom = math.sqrt(sum(a * a for a in cx) * sum(b * b for b in cy))
    observed = abs(sum(a * b for a, b in zip(cx, cy))) / denom
    hits = total = 0
    eps = 1e-12
    for perm in itertools.permutations(cy):
        total += 1
        if abs(sum(a * b for a, b in zip(cx, perm))) / denom >= observed - eps:
            hits += 1
    return hits / total
