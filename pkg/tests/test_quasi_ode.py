import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasisl import IVPSpec, count_zeros, delta_interaction_problem, integrate_ivp, make_problem, solve, wronskian
from quasisl.coefficients import Coefficient, Polynomial, Sin
from quasisl.errors import OutOfRange
from quasisl.quasi_ode import SolutionTrajectory, load_dump, reciprocal_integrals, second_solution


def test_sine_solution_dense_output(unit_pi):
    traj = solve(unit_pi, 1.0, 0.0, 0.0, 1.0, math.pi)
    xs = np.linspace(0, math.pi, 301)
    u, u1 = traj.evaluate(xs)
    np.testing.assert_allclose(u, np.sin(xs), atol=1e-9)
    np.testing.assert_allclose(u1, np.cos(xs), atol=1e-9)
    du, _ = traj.derivative(xs)
    np.testing.assert_allclose(du, np.cos(xs), atol=1e-8)


def test_zero_detection_and_count(unit_pi):
    traj = solve(unit_pi, 4.0, 0.0, 0.0, 1.0, math.pi)
    zs = [z for z in traj.zero_locations() if z > 1e-12]
    assert zs[0] == pytest.approx(math.pi / 2, abs=1e-9)
    assert count_zeros(traj, (0.0, math.pi)) == 1
    assert count_zeros(traj, (0.0, math.pi), open=False) == 3


def test_stop_after_zeros(unit_pi):
    traj = solve(unit_pi, 100.0, 0.0, 0.0, 1.0, math.pi, stop_after_zeros=3)
    assert traj.x_max < math.pi
    assert len([z for z in traj.zeros if z.x > 0]) >= 3


def test_backward_integration(unit_pi):
    traj = solve(unit_pi, 1.0, math.pi, 0.0, -1.0, 0.0)
    assert traj.direction == "backward"
    u, u1 = traj.evaluate(np.array([math.pi / 2, 0.3]))
    np.testing.assert_allclose(u, [1.0, math.sin(0.3)], atol=1e-9)


def test_renormalization_tracks_growth():
    prob = make_problem(0.0, 400.0)
    traj = solve(prob, -1.0, 0.0, 1.0, 1.0, 400.0)
    assert traj.scale_log > 100  # factored out, so u itself stays moderate
    u, _, lg = traj.evaluate_scaled(np.array([400.0]))
    assert math.log(u[0]) + lg[0] == pytest.approx(400.0, rel=1e-9)


def test_wronskian_constant_variable_coefficients():
    prob = make_problem(0.0, 2.0, p=Polynomial((1.0, 0.5)), q=Sin(2.0, 3.0, 0.0), r=Polynomial((2.0, -0.5)), s=0.7)
    u = solve(prob, 3.0, 0.0, 0.0, 1.0, 2.0)
    v = solve(prob, 3.0, 0.0, 1.0, 0.0, 2.0)
    xs = np.linspace(0, 2, 101)
    w = wronskian(u, v, xs)
    assert np.max(np.abs(w + 1.0)) < 1e-8


def test_quasi_derivative_continuous_at_jump(delta_half):
    traj = solve(delta_half, 5.0, 0.0, 0.0, 1.0, 1.0)
    x0, eps = 0.5, 1e-9
    ul, u1l = traj.evaluate(np.array([x0 - eps]))
    ur, u1r = traj.evaluate(np.array([x0 + eps]))
    assert abs(ul[0] - ur[0]) < 1e-7
    assert abs(u1l[0] - u1r[0]) < 1e-7
    dl, _ = traj.derivative(np.array([x0 - eps]))
    dr, _ = traj.derivative(np.array([x0 + eps]))
    assert dr[0] - dl[0] == pytest.approx(-1.0 * ur[0], abs=1e-6)


def test_breakpoints_are_nodes(delta_half):
    traj = solve(delta_half, 1.0, 0.0, 0.0, 1.0, 1.0)
    assert 0.5 in set(traj.node_x().tolist())


def test_inhomogeneous_particular_solution(unit_pi):
    # -u'' = 1 with u(0) = 0, u'(0) = pi/2 gives u = x (pi - x) / 2
    g = Coefficient.constant(1.0)
    traj = integrate_ivp(unit_pi, IVPSpec(x0=0.0, u0=0.0, u1_0=math.pi / 2, lam=0.0, target=math.pi, g=g))
    xs = np.linspace(0, math.pi, 51)
    u, _ = traj.evaluate(xs)
    np.testing.assert_allclose(u, xs * (math.pi - xs) / 2, atol=1e-9)


def test_out_of_range_and_dump_roundtrip(unit_pi):
    traj = solve(unit_pi, 1.0, 0.0, 0.0, 1.0, 1.0)
    with pytest.raises(OutOfRange):
        traj.evaluate(np.array([2.0]))
    rows = load_dump(traj.dump())
    assert rows == traj.nodes()
    rebuilt = SolutionTrajectory.from_nodes(unit_pi, 1.0, *zip(*[(x, u * math.exp(g), v * math.exp(g)) for x, u, v, g in rows]))
    xs = np.linspace(0, 1, 17)
    np.testing.assert_allclose(rebuilt.evaluate(xs)[0], np.sin(xs), atol=1e-9)


def test_reduction_of_order_wronskian():
    prob = make_problem(0.0, 3.0)
    base = solve(prob, -1.0, 0.0, 1.0, 0.0, 3.0)  # cosh
    u2 = second_solution(prob, base, 1.0, (0.5, 3.0))
    xs = np.linspace(0.6, 2.9, 21)
    assert np.max(np.abs(wronskian(base, u2, xs) - 1.0)) < 1e-8
    # integral of 1/cosh^2 over (0, 1) is tanh 1
    cells = reciprocal_integrals(base, np.linspace(0.0, 1.0, 11))
    assert cells.sum() == pytest.approx(math.tanh(1.0), rel=1e-9)


@given(lam=st.floats(0.2, 30.0))
def test_sine_zeros_match_closed_form(lam):
    prob = make_problem(0.0, math.pi)
    traj = solve(prob, lam, 0.0, 0.0, 1.0, math.pi)
    k = math.sqrt(lam)
    expected = [j * math.pi / k for j in range(1, int(k) + 1) if j * math.pi / k < math.pi - 1e-6]
    got = [z for z in traj.zero_locations() if 1e-9 < z < math.pi - 1e-6]
    assert len(got) == len(expected)
    np.testing.assert_allclose(got, expected, atol=1e-8)


@given(
    lam=st.floats(-5.0, 20.0),
    u0=st.floats(-2.0, 2.0),
    v0=st.floats(-2.0, 2.0),
)
def test_wronskian_invariance_property(lam, u0, v0):
    if abs(u0) + abs(v0) < 1e-3:
        return
    prob = make_problem(0.0, 2.0, q=Sin(1.0, 2.0, 0.0), s=Coefficient.piecewise([1.0], [0.0, 0.5]))
    a = solve(prob, lam, 0.0, u0, v0, 2.0)
    b = solve(prob, lam, 0.0, 1.0, 0.0, 2.0)
    w = wronskian(a, b, np.linspace(0, 2, 9))
    # W(a, b)(0) = -v0
    assert np.max(np.abs(w + v0)) < 1e-8 * max(1.0, math.exp(2 * math.sqrt(max(-lam, 0) + 1)))


@given(alpha=st.floats(-50.0, 50.0), lam=st.floats(-10.0, 40.0))
def test_linearity_in_initial_data(alpha, lam):
    if abs(alpha) < 1e-3:
        return
    prob = make_problem(0.0, 2.0, q=Sin(1.0, 2.0, 0.0), s=Coefficient.piecewise([1.0], [0.0, 0.5]))
    base = solve(prob, lam, 0.0, 0.3, 1.0, 2.0)
    scaled = solve(prob, lam, 0.0, 0.3 * alpha, alpha, 2.0)
    xs = np.linspace(0.0, 2.0, 41)
    ub, vb = base.evaluate(xs)
    us, vs = scaled.evaluate(xs)
    scale = max(np.max(np.abs(ub)), np.max(np.abs(vb)))
    assert np.max(np.abs(us - alpha * ub)) <= 1e-8 * abs(alpha) * scale
    assert np.max(np.abs(vs - alpha * vb)) <= 1e-8 * abs(alpha) * scale


@given(lam=st.floats(-3.0, 20.0))
def test_time_reversal(lam):
    prob = make_problem(0.0, 2.0, p=Polynomial((1.0, 0.5)), q=Sin(1.0, 3.0, 0.0), s=0.2)
    fwd = solve(prob, lam, 0.0, 0.4, 1.0, 2.0)
    _, u, v, lg = fwd.end_state()
    back = solve(prob, lam, 2.0, u * math.exp(lg), v * math.exp(lg), 0.0)
    _, u0, v0, lg0 = back.end_state()
    scale = math.exp(max(lg, 0.0)) * max(1.0, abs(u), abs(v))
    tol = 10 * 1e-10 * scale
    assert abs(u0 * math.exp(lg0) - 0.4) <= max(tol, 1e-8)
    assert abs(v0 * math.exp(lg0) - 1.0) <= max(tol, 1e-8)


def test_second_solution_satisfies_system():
    prob = make_problem(0.0, 3.0, p=Polynomial((1.0, 0.3)), q=Sin(1.0, 2.0, 0.0), s=0.25)
    base = solve(prob, -2.0, 0.0, 1.0, 0.0, 3.0)
    u2 = second_solution(prob, base, 1.5, (0.5, 3.0))
    xs = np.linspace(0.7, 2.8, 61)
    h = 1e-4
    _, vp = u2.evaluate(xs + h)
    _, vm = u2.evaluate(xs - h)
    u, v = u2.evaluate(xs)
    dv = (vp - vm) / (2 * h)
    res = -dv + 0.25 * v + (prob.q.values(xs) + 2.0) * u
    assert np.max(np.abs(res)) <= 1e-6 * max(1.0, np.max(np.abs(v)))


@given(lams=st.lists(st.floats(-5.0, 60.0), min_size=2, max_size=6))
def test_zero_count_nondecreasing_in_lambda(lams):
    prob = make_problem(0.0, math.pi)
    counts = [count_zeros(solve(prob, lam, 0.0, 0.0, 1.0, math.pi), (0.0, math.pi)) for lam in sorted(lams)]
    assert counts == sorted(counts)
