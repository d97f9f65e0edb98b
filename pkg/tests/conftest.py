"""Shared brute-force oracles.

Everything here recomputes package quantities by the most literal route
available (nested loops over exact Fractions), so the fast paths in the
library are always checked against an independent implementation.
"""

from fractions import Fraction

import pytest

from cantorlab import BasicSequence


def brute_product_sum(values, k):
    """sum_i prod_{l<k} values[i+l] over all full windows, exact."""
    t = len(values)
    total = Fraction(0)
    for i in range(t - k + 1):
        prod = Fraction(1)
        for l in range(k):
            prod *= Fraction(values[i + l])
        total += prod
    return total


def brute_qnk(qs, k, n):
    """Q_n^(k) by direct summation; qs is a plain list, 1-based positions."""
    total = Fraction(0)
    for j in range(1, n + 1):
        prod = Fraction(1)
        for l in range(k):
            prod *= qs[j + l - 1]
        total += Fraction(1, prod)
    return total


def seq_of(values):
    return BasicSequence.from_values(list(values))


@pytest.fixture(scope="session")
def pow14():
    return BasicSequence.from_spec("pow:1/4:1")


@pytest.fixture(scope="session")
def pow13():
    return BasicSequence.from_spec("pow:1/3:1")
