import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import DELTA_LAMBDA1
from quasisl import (
    convergence_order,
    eigenvalue,
    energy_identity_check,
    energy_inequality_quotients,
    greatest_lower_bound,
    integrand_consistency_check,
    jacobi_factorization_residual,
    make_problem,
    positive_solution,
    q_recovery_residual,
)
from quasisl.coefficients import Polynomial, Sin
from quasisl.errors import SupportViolation, ValidationError
from quasisl.functions import Bump, SineArch, random_bumps
from quasisl.lower_bound import form_floor, truncation_intervals
from quasisl.coefficients import TruncationConfig


def test_glb_constant_problem(unit_pi):
    res = greatest_lower_bound(unit_pi)
    assert res.lambda0 == pytest.approx(1.0, abs=1e-7)
    lo, hi = res.bracket
    assert lo <= 1.0 <= hi + 1e-9 and hi - lo <= 1e-8
    assert res.witness_positive is not None
    assert res.witness_violation[1] <= math.pi + 1e-9
    assert not res.extrapolated


def test_glb_equals_lambda1_sin_potential():
    prob = make_problem(0.0, math.pi, q=Sin(1.0, 1.0, 0.0))
    assert greatest_lower_bound(prob).lambda0 == pytest.approx(eigenvalue(prob, 1).lam, abs=1e-7)


def test_glb_delta(delta_half):
    assert greatest_lower_bound(delta_half).lambda0 == pytest.approx(DELTA_LAMBDA1, abs=1e-7)


def test_glb_singular_half_line(half_line):
    res = greatest_lower_bound(half_line)
    lams = [t for _, t in res.truncation_trace]
    assert np.all(np.diff(lams) < 0)
    for (c, d), lam in res.truncation_trace:
        assert lam == pytest.approx((math.pi / (d - c)) ** 2, abs=1e-7)
    assert 0.0 <= res.lambda0 <= 1e-4
    assert res.extrapolated


def test_truncation_intervals_nest(half_line):
    ivs = truncation_intervals(half_line, TruncationConfig())
    for (c0, d0), (c1, d1) in zip(ivs, ivs[1:]):
        assert c1 <= c0 and d1 > d0


def test_form_floor():
    prob = make_problem(0.0, 1.0, q=Polynomial((2.0, 1.0)))
    assert form_floor(prob, 0.0, 1.0) == pytest.approx(2.0)


def test_q_recovery(unit_pi):
    u0 = positive_solution(unit_pi, 0.5)
    grid = np.linspace(0.1, math.pi - 0.1, 101)
    assert q_recovery_residual(unit_pi, u0, 0.5, grid) < 1e-8


def test_q_recovery_variable_coefficients():
    prob = make_problem(0.0, 1.0, p=Polynomial((1.0, 1.0)), q=Sin(2.0, 3.0, 0.0), s=0.4)
    u0 = positive_solution(prob, 0.0)
    assert q_recovery_residual(prob, u0, 0.0, np.linspace(0.05, 0.95, 91)) < 1e-6


def test_jacobi_and_integrand_orders(unit_pi):
    u0 = positive_solution(unit_pi, 0.5)
    f = Bump(1.0, 2.0)
    jac = convergence_order(lambda h: jacobi_factorization_residual(unit_pi, f, u0, 0.5, h), 0.01)
    con = convergence_order(lambda h: integrand_consistency_check(unit_pi, f, u0, h), 0.01)
    assert jac.min_order >= 1.9
    assert con.min_order >= 1.9
    assert jac.residuals[-1] < jac.residuals[0]


def test_energy_identity(unit_pi):
    u0 = positive_solution(unit_pi, 0.5)
    for f in random_bumps(0.0, math.pi, 5, seed=3, margin=0.1)[1:]:
        chk = energy_identity_check(unit_pi, f, u0, 0.5)
        assert chk.gap < 1e-8
        assert chk.inequality_margin > 0


def test_support_checked(unit_pi):
    u0 = positive_solution(unit_pi, 0.5)
    with pytest.raises(ValidationError):
        energy_identity_check(unit_pi, Bump(-1.0, 1.0), u0, 0.5)


def test_energy_inequality_quotients(unit_pi):
    qs = energy_inequality_quotients(unit_pi, random_bumps(0.0, math.pi, 10, seed=1))
    assert qs[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(qs >= 1.0 - 1e-9)


@given(q0=st.floats(-3.0, 3.0), length=st.floats(0.5, 3.0))
def test_glb_matches_closed_form(q0, length):
    prob = make_problem(0.0, length, q=q0)
    expected = (math.pi / length) ** 2 + q0
    assert greatest_lower_bound(prob).lambda0 == pytest.approx(expected, abs=1e-7)


@given(seed=st.integers(0, 1000))
def test_energy_identity_property(seed):
    prob = make_problem(0.0, 1.0, p=Polynomial((1.0, 0.5)), q=Sin(2.0, 4.0, 0.0), s=0.3)
    u0 = positive_solution(prob, 1.0)
    for f in random_bumps(0.0, 1.0, 3, seed=seed, margin=0.05)[1:]:
        chk = energy_identity_check(prob, f, u0, 1.0)
        assert chk.gap <= 1e-6 * max(1.0, abs(chk.lhs))


def test_predicate_monotone_on_grid():
    from quasisl import disconjugacy_check

    prob = make_problem(0.0, math.pi, q=Sin(1.0, 1.0, 0.0))
    tol = 1e-8
    lam0 = greatest_lower_bound(prob, tol=tol).lambda0
    grid = np.linspace(lam0 - 3.0, lam0 + 3.0, 50)
    flags = [disconjugacy_check(prob, lam, witness=False).disconjugate for lam in grid]
    for lam, flag in zip(grid, flags):
        if lam < lam0:
            assert flag
        elif lam > lam0 + tol:
            assert not flag


def test_four_way_at_offsets():
    from quasisl import disconjugacy_check

    prob = make_problem(0.0, math.pi, q=Sin(1.0, 1.0, 0.0))
    lam0 = greatest_lower_bound(prob).lambda0
    qs = energy_inequality_quotients(prob, random_bumps(0.0, math.pi, 20, seed=0))
    below, above = lam0 - 0.5, lam0 + 0.5
    assert positive_solution(prob, below) is not None
    assert disconjugacy_check(prob, below).disconjugate
    assert np.all(qs >= below)
    assert positive_solution(prob, above) is None
    assert not disconjugacy_check(prob, above).disconjugate
    assert np.any(qs < above)


def test_step_identity_away_from_jump(delta_half):
    u0 = positive_solution(delta_half, 5.0)
    f = Bump(0.2, 0.8)
    study = convergence_order(lambda h: integrand_consistency_check(delta_half, f, u0, h), 0.005)
    assert study.min_order >= 1.9


def test_integrand_vanishes_for_multiple_of_u0(unit_pi):
    from quasisl.functions import Smooth

    lam0 = 0.5
    u0 = positive_solution(unit_pi, lam0)
    k, eps = math.sqrt(lam0), u0.start.u
    # f = 3 u0 on (0.5, 2.5), with u0 = eps cos(kx) + sin(kx) / k in closed form
    f = Smooth(
        lambda x: 3 * (eps * np.cos(k * x) + np.sin(k * x) / k),
        lambda x: 3 * (-eps * k * np.sin(k * x) + np.cos(k * x)),
        lambda x: -3 * k * k * (eps * np.cos(k * x) + np.sin(k * x) / k),
        0.5,
        2.5,
    )
    assert u0.start.u1 == 1.0
    assert integrand_consistency_check(unit_pi, f, u0, 1e-3) < 1e-8
