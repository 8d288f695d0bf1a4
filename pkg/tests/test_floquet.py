import dataclasses

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from floqnf.errors import UnsupportedK
from floqnf.floquet import (check_real_T_periodic_existence, complex_floquet_form, consistency_check,
                            nonnegative_multiplier_check, modulus_check, real_floquet_form, residual_check,
                            verify_antiperiodicity)
from floqnf.linsys import constant_system, random_manufactured

from conftest import LN2


def spectrum(R):
    return np.sort_complex(np.linalg.eigvals(R))


def test_zero_system_form():
    form = real_floquet_form(constant_system(np.zeros((2, 2))))
    assert form.d == 0
    assert np.allclose(form.R, 0.0)
    assert np.allclose(form.Q(0.7), np.eye(2), atol=1e-14)
    assert verify_antiperiodicity(form).deviation <= 1e-15


def test_reference_form(ref_sys):
    form = real_floquet_form(ref_sys)
    assert form.d == 2
    assert np.allclose(spectrum(form.R), [0.0, LN2], atol=1e-7)
    anti = verify_antiperiodicity(form)
    assert anti.passed and anti.deviation <= 1e-6
    for t in np.linspace(0, 1, 9):
        q = form.Q(t)
        assert np.linalg.norm(form.Q(t + 1) + q, 2) <= 1e-6 * np.linalg.norm(q, 2)


def test_constant_diagonal_form():
    form = real_floquet_form(constant_system(np.diag([1.0, 2.0])))
    assert form.d == 0
    assert np.allclose(spectrum(form.R), [1.0, 2.0], atol=1e-7)
    assert verify_antiperiodicity(form).deviation <= 1e-8


def test_corrupted_R_is_caught(ref_sys):
    form = real_floquet_form(ref_sys)
    R = form.R.copy()
    R[0, 0] += 0.1
    bad = dataclasses.replace(form, R=R)
    v = verify_antiperiodicity(bad)
    assert not v.passed and v.deviation >= 1e-2


def test_checks_pass_on_reference(ref_sys):
    form = real_floquet_form(ref_sys)
    for v in (residual_check(form, ref_sys), consistency_check(form), modulus_check(form)):
        assert v.passed, v.to_dict()


def test_R_tilde_shift(ref_sys):
    form = real_floquet_form(ref_sys)
    s2 = form.decomposition.segment("J2")
    diff = form.R_tilde - form.R
    assert np.allclose(diff[s2, s2], 1j * np.pi * np.eye(2))
    assert np.count_nonzero(diff) == 2


def test_complex_form_k1(ref_sys):
    cf = complex_floquet_form(ref_sys, 1)
    assert np.allclose(spectrum(cf.B), np.sort_complex([1j * np.pi, LN2 + 1j * np.pi]), atol=1e-7)
    assert cf.periodicity_deviation() <= 1e-6


def test_complex_form_k2_is_real(ref_sys):
    cf = complex_floquet_form(ref_sys, 2)
    assert np.isrealobj(cf.B)
    assert np.allclose(spectrum(cf.B), [0.0, LN2], atol=1e-7)
    assert cf.periodicity_deviation(1) <= 1e-6


def test_complex_form_zero_and_bad_k():
    cf = complex_floquet_form(constant_system(np.zeros((2, 2))), 1)
    assert np.allclose(cf.B, 0.0) and np.allclose(cf.P(0.4), np.eye(2))
    with pytest.raises(UnsupportedK):
        complex_floquet_form(constant_system(np.zeros((2, 2))), 3)


def test_complex_form_matches_scipy_logm():
    A = np.array([[0.2, 1.0], [-1.0, 0.1]])
    cf = complex_floquet_form(constant_system(A), 1)
    assert np.allclose(cf.B, sla.logm(sla.expm(A)).real, atol=1e-7)


def test_existence_decisions(ref_sys):
    no = check_real_T_periodic_existence(ref_sys)
    assert no.a_index == 2 and not no.exists and no.witness is None
    yes = check_real_T_periodic_existence(constant_system(np.diag([1.0, 2.0])))
    assert yes.exists and yes.witness.d == 0


def test_nonnegative_multiplier_test_is_only_sufficient():
    assert nonnegative_multiplier_check([1.0, 2.0, 0.5 + 0.5j, 0.5 - 0.5j])
    assert not nonnegative_multiplier_check([-1.0, -1.0])
    # -I has A-index 0, so a real periodic form exists although the multiplier test says no
    assert real_floquet_form(constant_system(np.pi * np.array([[0.0, -1.0], [1.0, 0.0]]))).d == 0


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.sampled_from([0, 2]))
def test_random_forms_satisfy_checks(seed, d):
    sys = random_manufactured(np.random.default_rng(seed), 2 + d // 2, d)
    form = real_floquet_form(sys)
    assert form.d % 2 == 0
    for v in (residual_check(form, sys), consistency_check(form), verify_antiperiodicity(form)):
        assert v.passed, v.to_dict()
