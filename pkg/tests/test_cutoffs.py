import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loxokit.cutoffs import plateau_bump, plateau_step, smooth_bridge


def test_bridge_endpoints_exact():
    assert smooth_bridge(-1.0) == 0.0
    assert smooth_bridge(0.0) == 0.0
    assert smooth_bridge(1.0) == 1.0
    assert smooth_bridge(5.0) == 1.0
    assert smooth_bridge(0.5) == 0.5


@settings(deadline=None, max_examples=80)
@given(st.floats(-2.0, 3.0), st.floats(-2.0, 3.0))
def test_bridge_monotone(a, b):
    lo, hi = sorted((a, b))
    assert smooth_bridge(lo) <= smooth_bridge(hi)


def test_plateaus_complementary_and_exact():
    x = np.linspace(-3.0, 3.0, 301)
    s = plateau_step(x, 0.5, 1.0)
    b = plateau_bump(x, 0.5, 1.0)
    assert np.array_equal(s + b, np.ones_like(x))
    assert np.all(s[np.abs(x) <= 0.5] == 0.0)
    assert np.all(s[np.abs(x) >= 1.0] == 1.0)
    assert np.all((0.0 <= s) & (s <= 1.0))
    # even in x
    assert np.allclose(s, s[::-1], atol=0)


def test_plateau_scalar_and_vector_agree():
    assert plateau_step(0.75, 0.5, 1.0) == \
        plateau_step(np.array([0.75]), 0.5, 1.0)[0]
    assert isinstance(plateau_bump(0.2, 0.5, 1.0), float)


def test_plateau_rejects_bad_band():
    with pytest.raises(ValueError):
        plateau_step(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        plateau_step(0.0, -0.5, 1.0)
