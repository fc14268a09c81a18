import random
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from worldtag.errors import UsageError
from worldtag.metrics import edit_distance


def oracle(a, b):
    """Plain recursion over the last characters, memoised on prefix lengths."""

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


short = st.text(alphabet="abcde", max_size=30)


@pytest.mark.parametrize("a, b, expected", [
    ("abc", "abc", 0),
    ("ab", "ba", 2),
    ("kitten", "sitting", 3),
    ("", "abc", 3),
    ("abc", "", 3),
    ("\u0451\u043b\u043a\u0430", "\u0435\u043b\u043a\u0430", 1),
    ("flaw", "lawn", 2),
])
def test_known_distances(a, b, expected):
    assert edit_distance(a, b) == expected
    assert edit_distance(b, a) == expected


def test_matches_recursive_oracle_on_random_pairs():
    rng = random.Random(2024)
    for _ in range(1000):
        a = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 12)))
        b = "".join(rng.choice("abcd") for _ in range(rng.randint(0, 12)))
        expected = oracle(a, b)
        assert edit_distance(a, b) == expected, (a, b)
        for cap in (0, 1, 3, 12):
            capped = edit_distance(a, b, cap=cap)
            assert capped == (expected if expected <= cap else None), (a, b, cap)


@settings(max_examples=500)
@given(short, short, short)
def test_metric_axioms(a, b, c):
    ab, bc, ac = edit_distance(a, b), edit_distance(b, c), edit_distance(a, c)
    assert edit_distance(a, a) == 0
    assert ab == edit_distance(b, a)
    assert ac <= ab + bc
    assert abs(len(a) - len(b)) <= ab <= max(len(a), len(b))


@settings(max_examples=300)
@given(short, short, st.integers(0, 35))
def test_capped_never_returns_a_wrong_number(a, b, cap):
    exact = edit_distance(a, b)
    capped = edit_distance(a, b, cap=cap)
    if exact <= cap:
        assert capped == exact
    else:
        assert capped is None


def test_negative_cap_rejected():
    with pytest.raises(UsageError):
        edit_distance("a", "b", cap=-1)
