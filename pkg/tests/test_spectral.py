import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from klmfid import spectral
from klmfid.spectral import (
    EigenSolverError,
    SymTridiagonal,
    ThetaSolverError,
    build_a,
    build_a_tilde,
    build_gamma,
    largest_eigenpair,
    matrix_relation_residual,
    solve_theta,
    sturm_count,
    theta_condition,
)

SQRT3 = math.sqrt(3.0)


def dense_top(m):
    # independent oracle: LAPACK dense symmetric eigensolver
    w, v = np.linalg.eigh(m.to_dense())
    vec = v[:, -1]
    return w[-1], vec * np.sign(vec[np.flatnonzero(np.abs(vec) > 1e-14)[0]])


def test_sym_tridiagonal_rejects_bad_lengths():
    with pytest.raises(ValueError):
        SymTridiagonal([1.0, 2.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        SymTridiagonal([], [])


@pytest.mark.parametrize("builder", [build_a_tilde, build_a, build_gamma])
def test_builders_reject_n_zero(builder):
    with pytest.raises(ValueError):
        builder(0)


def test_build_a_tilde_small():
    m = build_a_tilde(1)
    np.testing.assert_allclose(m.diag, [1 / 3, 1 / 3], rtol=0, atol=1e-16)
    np.testing.assert_allclose(m.offdiag, [1 / 6], rtol=0, atol=1e-16)
    m = build_a_tilde(2)
    np.testing.assert_allclose(m.diag, [1 / 3, 2 / 3, 1 / 3], rtol=0, atol=1e-16)
    np.testing.assert_allclose(m.offdiag, [1 / 6, 1 / 6], rtol=0, atol=1e-16)
    m = build_a_tilde(3)
    assert m.size == 4
    np.testing.assert_allclose(m.diag[1:3], [2 / 3, 2 / 3])


def test_build_a_small():
    m = build_a(1)
    np.testing.assert_allclose(m.diag, [0.25, 0.25])
    np.testing.assert_allclose(m.offdiag, [0.25])
    m = build_a(2)
    np.testing.assert_allclose(m.diag, [0.25, 0.5, 0.25])
    np.testing.assert_allclose(m.offdiag, [0.25, 0.25])
    m = build_a(4)
    assert m.size == 5
    np.testing.assert_allclose(m.diag[1:4], 0.5)


@pytest.mark.parametrize("n", [1, 2, 10, 57, 200])
def test_matrix_relation(n):
    assert matrix_relation_residual(n) <= 1e-15


def test_quadratic_form_matches_dense(rng):
    m = build_a_tilde(7)
    x = rng.normal(size=8)
    assert m.quadratic_form(x) == pytest.approx(x @ m.to_dense() @ x, abs=1e-14)
    np.testing.assert_allclose(m.matvec(x), m.to_dense() @ x, atol=1e-14)


def test_theta_n1_closed_form():
    # g(θ) = sinθ (cos²θ + 2cosθ + 3/4) at n=1, root cosθ = -1/2
    sol = solve_theta(1)
    assert sol.theta == pytest.approx(2 * math.pi / 3, abs=1e-14)
    assert sol.mu == pytest.approx(0.5, abs=1e-15)


def test_theta_n2_closed_form():
    # char. polynomial of the 3x3 matrix: mu_2 = (3+√3)/6, cosθ = 3 mu_2 - 2
    sol = solve_theta(2)
    assert sol.theta == pytest.approx(math.acos((SQRT3 - 1) / 2), abs=1e-14)
    assert sol.mu == pytest.approx((3 + SQRT3) / 6, abs=1e-15)


def test_theta_large_n_shift():
    n = 100
    sol = solve_theta(n)
    shift = math.pi / (n + 1) + math.pi / (3 * n**2)
    # O(n^-3) agreement; the constant stays below 10
    assert abs(sol.theta - shift) * n**3 < 10


@pytest.mark.parametrize("n", list(range(1, 201)))
def test_theta_bracket_strict(n):
    t = solve_theta(n).theta
    assert math.pi / (n + 1) < t < math.pi / n


@pytest.mark.parametrize("n", [1, 3, 10, 100, 1000, 9999, 10000])
def test_theta_residual(n):
    sol = solve_theta(n)
    assert abs(theta_condition(sol.theta, n)) <= 1e-12
    assert sol.residual <= 1e-12


def test_theta_is_smallest_root():
    # dense scan from 0 finds no earlier sign change
    for n in (1, 2, 5, 20):
        t = solve_theta(n).theta
        grid = np.linspace(1e-9, t * (1 - 1e-9), 20001)
        vals = [theta_condition(x, n) for x in grid]
        assert all(v > 0 for v in vals)


def test_theta_failure_diagnostic(monkeypatch):
    monkeypatch.setattr(spectral, "theta_condition", lambda theta, n: 1.0)
    with pytest.raises(ThetaSolverError, match="no sign change"):
        solve_theta(5)


def test_theta_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_theta(0)
    with pytest.raises(ValueError):
        solve_theta(3, tol=0.0)


def test_eigenpair_a_tilde_n1():
    lam, vec = largest_eigenpair(build_a_tilde(1))
    assert lam == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(vec, [1 / math.sqrt(2)] * 2, atol=1e-14)


def test_eigenpair_a_n2():
    lam, vec = largest_eigenpair(build_a(2))
    assert lam == pytest.approx(0.75, abs=1e-15)
    np.testing.assert_allclose(vec, np.array([1, 2, 1]) / math.sqrt(6), atol=1e-14)


def test_eigenpair_diagonal_tie():
    lam, vec = largest_eigenpair(SymTridiagonal([1.0, 0.0, 1.0], [0.0, 0.0]))
    assert lam == 1.0
    np.testing.assert_array_equal(vec, [1.0, 0.0, 0.0])


@pytest.mark.parametrize("n", [1, 2, 3, 8, 50, 400])
@pytest.mark.parametrize("builder", [build_a_tilde, build_a])
def test_eigenpair_matches_dense_oracle(n, builder):
    m = builder(n)
    lam, vec = largest_eigenpair(m)
    lam_ref, vec_ref = dense_top(m)
    assert lam == pytest.approx(lam_ref, abs=1e-13)
    np.testing.assert_allclose(vec, vec_ref, atol=1e-9)
    assert np.max(np.abs(m.matvec(vec) - lam * vec)) <= 1e-12


@pytest.mark.parametrize("n", list(range(1, 51)))
def test_mu_formula_matches_eigensolver(n):
    lam, _ = largest_eigenpair(build_a_tilde(n))
    assert abs(solve_theta(n).mu - lam) <= 1e-10


@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_sturm_extremality(n):
    for m in (build_a_tilde(n), build_a(n)):
        lam, _ = largest_eigenpair(m)
        assert sturm_count(m, lam + 1e-9) == m.size
        assert sturm_count(m, lam - 1e-9) == m.size - 1


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=1, max_size=12).flatmap(
        lambda d: st.tuples(
            st.just(d),
            st.lists(st.floats(0.05, 3), min_size=len(d) - 1, max_size=len(d) - 1),
        )
    )
)
def test_eigenpair_property_random_tridiagonal(data):
    d, e = data
    m = SymTridiagonal(d, e)
    lam, vec = largest_eigenpair(m)
    lam_ref, _ = dense_top(m)
    assert lam == pytest.approx(lam_ref, abs=1e-10)
    assert abs(np.linalg.norm(vec) - 1) < 1e-12
    assert np.max(np.abs(m.matvec(vec) - lam * vec)) <= 1e-9
    assert sturm_count(m, lam + 1e-7) == m.size


def test_eigen_error_reports_best_residual():
    err = EigenSolverError("stalled", 3.5e-6)
    assert err.best_residual == 3.5e-6
    assert "3.500e-06" in str(err)
