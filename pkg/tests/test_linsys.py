import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqnf.errors import InputError, SingularQ
from floqnf.linsys import (QSpec, TrigMatrixPolynomial, constant_system, evaluate, manufacture,
                           manufactured_residual, piecewise_system, random_manufactured,
                           rotation_qspec, trig_system, validate_period)

from conftest import LN2, W, reference_system


def test_constant_body_is_constant():
    a0 = [[0.0, 1.0], [-1.0, 0.0]]
    sys = constant_system(a0)
    for t in (0.0, 0.3, 7.9, -2.2):
        assert np.array_equal(evaluate(sys, t), a0)


def test_trig_quarter_period_vanishes():
    sys = trig_system(np.zeros((2, 2)), cos=[np.eye(2)], T=1.0)
    assert np.allclose(evaluate(sys, 0.25), 0.0, atol=1e-15)


def test_manufactured_at_zero():
    sys = reference_system()
    assert np.allclose(evaluate(sys, 0.0), W + np.diag([0.0, LN2]), atol=1e-13)


def test_manufactured_with_identity_q_is_constant():
    q = QSpec(TrigMatrixPolynomial(1.0, np.eye(2), half_frequency=True), 0)
    rstar = np.array([[0.2, 1.0], [0.0, -0.3]])
    sys = manufacture(q, rstar)
    for t in np.linspace(0, 2, 7):
        assert np.allclose(sys(t), rstar, atol=1e-14)


def test_manufactured_rotation_only_gives_w():
    sys = reference_system(np.zeros((2, 2)))
    for t in np.linspace(0, 1, 5):
        assert np.allclose(sys(t), W, atol=1e-13)


def test_evaluate_is_pure():
    sys = reference_system()
    assert np.array_equal(sys(0.123), sys(0.123))


def test_piecewise_right_limit_and_reduction():
    sys = piecewise_system([0.0, 0.5, 1.0], [np.eye(2), 2 * np.eye(2)])
    assert np.array_equal(sys(0.5), 2 * np.eye(2))
    assert np.array_equal(sys(1.25), np.eye(2))
    assert np.array_equal(sys(-0.25), 2 * np.eye(2))


@pytest.mark.parametrize("bp", [[0.0, 0.5, 0.5, 1.0], [0.1, 1.0], [0.0]])
def test_piecewise_rejects_bad_breakpoints(bp):
    with pytest.raises(InputError):
        piecewise_system(bp, [np.eye(2)] * max(len(bp) - 1, 1))


def test_non_finite_coefficients_rejected():
    with pytest.raises(InputError):
        trig_system([[0.0, np.nan], [0.0, 0.0]])


def test_validate_period_exact_bodies():
    assert validate_period(constant_system(np.eye(2)), 16).max_deviation == 0.0
    sys = trig_system(np.eye(2), cos=[np.ones((2, 2))], sin=[np.eye(2)], T=0.7)
    rep = validate_period(sys, 16)
    assert rep.passed and rep.tolerance == 1e-12


def test_validate_period_manufactured():
    rep = validate_period(reference_system(), 32)
    assert rep.passed and rep.tolerance == 1e-9


def test_qspec_declared_relation():
    # cos(pi t/T) E is T-antiperiodic, so declaring d = 0 must fail
    E = np.eye(2)
    curve = TrigMatrixPolynomial(1.0, np.zeros((2, 2)), [E], [np.array([[0.0, -1.0], [1.0, 0.0]])],
                                 half_frequency=True)
    assert not validate_period(QSpec(curve, 0), 32).passed
    assert validate_period(QSpec(curve, 2), 32).passed
    assert validate_period(rotation_qspec(2, 1.0), 32).passed


def test_singular_q_rejected():
    curve = TrigMatrixPolynomial(1.0, np.zeros((2, 2)), [np.diag([1.0, 0.0])], half_frequency=True)
    with pytest.raises(SingularQ):
        manufacture(QSpec(curve, 2), np.zeros((2, 2)))


def test_half_frequency_only_inside_qspec():
    with pytest.raises(InputError):
        QSpec(TrigMatrixPolynomial(1.0, np.eye(2)), 0)


def test_manufactured_residual_small():
    assert manufactured_residual(reference_system()) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 4), d=st.sampled_from([0, 2]))
def test_random_manufactured_properties(seed, n, d):
    sys = random_manufactured(np.random.default_rng(seed), n, d)
    assert manufactured_residual(sys) <= 1e-9
    assert validate_period(sys, 16).passed
