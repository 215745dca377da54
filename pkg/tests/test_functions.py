import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasisl.errors import PreconditionError
from quasisl.functions import Bump, GridFunction, SineArch, hat, random_bumps


@given(lo=st.floats(-2.0, 0.0), width=st.floats(0.5, 3.0), x=st.floats(0.05, 0.95))
def test_derivatives_match_differences(lo, width, x):
    hi = lo + width
    t = lo + x * width
    h = 1e-5 * width
    for f in (Bump(lo, hi, 1.3), SineArch(lo, hi, 2)):
        fd = (f.values(t + h) - f.values(t - h)) / (2 * h)
        assert f.slopes(t) == pytest.approx(fd, rel=1e-6, abs=1e-6)
        fd2 = (f.slopes(t + h) - f.slopes(t - h)) / (2 * h)
        assert f.second(t) == pytest.approx(fd2, rel=1e-5, abs=1e-4)


def test_supports_and_scaling():
    f = Bump(0.0, 1.0)
    np.testing.assert_array_equal(f.values([-0.5, 1.5]), [0.0, 0.0])
    assert f.scaled(3.0).values(0.5) == pytest.approx(6.0)
    g = hat(0.0, 2.0)
    assert g.knots == (0.0, 1.0, 2.0)
    np.testing.assert_allclose(g.slopes([0.5, 1.5, 3.0]), [1.0, -1.0, 0.0])
    with pytest.raises(PreconditionError):
        GridFunction((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(PreconditionError):
        Bump(1.0, 1.0)


def test_random_bumps_deterministic():
    a = random_bumps(0.0, 1.0, 5, seed=11, margin=0.1)
    b = random_bumps(0.0, 1.0, 5, seed=11, margin=0.1)
    assert a == b
    assert isinstance(a[0], SineArch)
    for f in a[1:]:
        lo, hi = f.support
        assert 0.1 <= lo < hi <= 0.9 and hi - lo >= 0.08
