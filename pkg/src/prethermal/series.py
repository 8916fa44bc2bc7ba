"""Formal graded power series over the Pauli-string algebra.

A series is a plain list of :class:`~prethermal.pauli.OperatorSum`, entry
``g`` holding the coefficient of the g-th power of the bookkeeping
parameter.  Grade 0 is always the zero operator here: every series in use
exponentiates to a unitary-like factor ``exp(series)``.

``bch_log`` composes two such factors with only commutators (the Magnus
recursion with Bernoulli weights), so disconnected products never appear
and term counts stay bounded by the locality of the inputs.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .pauli import OperatorSum, commutator

__all__ = ["zero_series", "series_add", "series_scale", "series_commutator",
           "series_conjugate_exp", "bch_log"]


def _bernoulli(n_max: int) -> list[float]:
    """Bernoulli numbers B_0..B_n_max with the B_1 = -1/2 convention."""
    out = []
    row: list[Fraction] = []
    for m in range(n_max + 1):
        row.append(Fraction(1, m + 1))
        for j in range(m, 0, -1):
            row[j - 1] = j * (row[j - 1] - row[j])
        out.append(float(row[0]))
    return out


def zero_series(length: int, grade_max: int) -> list[OperatorSum]:
    return [OperatorSum.zero(length) for _ in range(grade_max + 1)]


def truncated(a: list[OperatorSum], length: int, grade_max: int) -> list[OperatorSum]:
    return [a[g] if g < len(a) else OperatorSum.zero(length) for g in range(grade_max + 1)]


def series_add(a, b, factor: float | complex = 1.0):
    length = a[0].length if a else b[0].length
    grade_max = max(len(a), len(b)) - 1
    out = []
    for g in range(grade_max + 1):
        term = a[g] if g < len(a) else OperatorSum.zero(length)
        if g < len(b) and b[g]:
            term = term + factor * b[g]
        out.append(term)
    return out


def series_scale(a, factor):
    return [factor * entry for entry in a]


def series_commutator(a, b, grade_max: int):
    length = a[0].length
    out = zero_series(length, grade_max)
    for ga, entry_a in enumerate(a):
        if not entry_a or ga > grade_max:
            continue
        for gb, entry_b in enumerate(b):
            g = ga + gb
            if not entry_b or g > grade_max:
                continue
            out[g] = out[g] + commutator(entry_a, entry_b)
    return out


def is_zero(a) -> bool:
    return all(not entry for entry in a)


def series_conjugate_exp(x, y, grade_max: int):
    """exp(ad_x) applied to y, truncated at grade_max.

    Both arguments are graded series; x must have no grade-0 part, so the
    nested commutators raise the grade and the sum terminates.
    """
    length = y[0].length if y else x[0].length
    out = truncated(y, length, grade_max)
    current = truncated(y, length, grade_max)
    for k in range(1, grade_max + 1):
        current = series_commutator(x, current, grade_max)
        if is_zero(current):
            break
        out = series_add(out, current, 1.0 / math.factorial(k))
    return out


def bch_log(a, b, grade_max: int):
    """log(exp(a) exp(b)) as a graded series, truncated at grade_max.

    Uses the differential-equation recursion for Z(s) = log(e^{sa} e^{sb}):
    with F(s) = a + e^{s ad_a} b and psi(x) = x/(e^x - 1),

        Z'(s) = psi(ad_Z) F(s),
        m z_m = f_{m-1} + sum_{k>=1} (B_k / k!) [ad_Z^k F]_{m-1},

    all commutators, no bare products.  Since both inputs start at grade 1,
    z_m starts at grade m and m <= grade_max terms suffice.
    """
    length = (a[0] if a else b[0]).length
    a = truncated(a, length, grade_max)
    b = truncated(b, length, grade_max)
    if a[0] or b[0]:
        raise ValueError("bch_log expects series without a grade-0 part")
    bern = _bernoulli(grade_max)
    # f_k = ad_a^k(b)/k!; f_0 = a + b
    f = [series_add(a, b)]
    current = b
    for k in range(1, grade_max):
        current = series_commutator(a, current, grade_max)
        if is_zero(current):
            break
        f.append(series_scale(current, 1.0 / math.factorial(k)))
    z: list = [None]
    for m in range(1, grade_max + 1):
        acc = truncated(f[m - 1], length, grade_max) if m - 1 < len(f) else zero_series(length, grade_max)
        powers = {n: f[n] for n in range(m) if n < len(f)}  # [ad_Z^0 F]_n
        for k in range(1, m):
            next_powers = {}
            for n in range(k, m):
                term = zero_series(length, grade_max)
                for a_idx in range(1, n + 1):
                    rest = n - a_idx
                    if rest in powers and a_idx < len(z) and z[a_idx] is not None:
                        term = series_add(term, series_commutator(z[a_idx], powers[rest], grade_max))
                next_powers[n] = term
            powers = next_powers
            if bern[k] != 0.0 and (m - 1) in powers:
                acc = series_add(acc, powers[m - 1], bern[k] / math.factorial(k))
        z.append(series_scale(acc, 1.0 / m))
    total = zero_series(length, grade_max)
    for m in range(1, grade_max + 1):
        total = series_add(total, z[m])
    return total
