import numpy as np
import pytest

from polysafe.trajectory import (
    BasisMatrices,
    ControlPoints,
    DomainError,
    PolynomialCoeffs,
    basis_transform,
    bernstein_basis,
    bernstein_basis_many,
    closest_parameter,
    coeffs_from_control_points,
    control_points_from_coeffs,
    derivative_matrix,
    evaluate,
    hull_bounds,
    in_convex_hull,
)


@pytest.mark.unit
@pytest.mark.parametrize(
    "n,t,expected",
    [
        (2, 0.0, [1.0, 0.0, 0.0]),
        (1, 0.5, [0.5, 0.5]),
        (3, 0.5, [0.125, 0.375, 0.375, 0.125]),
    ],
)
def test_bernstein_basis_values(n, t, expected):
    np.testing.assert_allclose(bernstein_basis(n, t), expected, atol=1e-15)


@pytest.mark.unit
def test_partition_of_unity(rng):
    ts = rng.uniform(0.0, 1.0, 1000)
    for n in range(11):
        B = bernstein_basis_many(n, ts)
        err = np.max(np.abs(B.sum(axis=0) - 1.0))
        assert err <= 1e-12, f"{n=} {err=}"
        assert np.all(B >= 0.0)


@pytest.mark.unit
@pytest.mark.parametrize("n,t", [(3, 1.5), (3, -0.1), (-1, 0.5)])
def test_bernstein_basis_domain_errors(n, t):
    with pytest.raises(DomainError):
        bernstein_basis(n, t)


@pytest.mark.unit
def test_basis_transform_linear():
    np.testing.assert_array_equal(basis_transform(1), [[1, -1], [0, 1]])


@pytest.mark.unit
def test_basis_transform_reproduces_cubic_relations(rng):
    P = rng.integers(-50, 50, size=(2, 4))
    a = P @ basis_transform(3)
    assert a.dtype.kind == "i"
    P0, P1, P2, P3 = P.T
    np.testing.assert_array_equal(a[:, 3], P3 - 3 * P2 + 3 * P1 - P0)
    np.testing.assert_array_equal(a[:, 2], 3 * P2 - 6 * P1 + 3 * P0)
    np.testing.assert_array_equal(a[:, 1], 3 * P1 - 3 * P0)
    np.testing.assert_array_equal(a[:, 0], P0)


@pytest.mark.unit
@pytest.mark.parametrize("n", [1, 3, 6])
def test_constant_points_give_constant_coeffs(n):
    coeffs = coeffs_from_control_points(ControlPoints(np.full((1, n + 1), 2.5)))
    np.testing.assert_allclose(coeffs.coeffs, [[2.5] + [0.0] * n], atol=1e-12)


@pytest.mark.unit
def test_coeffs_round_trip(rng):
    P = ControlPoints(rng.normal(size=(3, 6)))
    coeffs = coeffs_from_control_points(P)
    back = control_points_from_coeffs(coeffs)
    np.testing.assert_allclose(back.points, P.points, atol=1e-10)

    line = coeffs_from_control_points(ControlPoints([[0.0, 1.0]]))
    np.testing.assert_allclose(line.coeffs, [[0.0, 1.0]])


@pytest.mark.unit
def test_basis_change_consistency(rng):
    P = ControlPoints(rng.normal(size=(2, 5)))
    coeffs = coeffs_from_control_points(P)
    for t in rng.uniform(0.0, 1.0, 200):
        err = np.max(np.abs(P.points @ bernstein_basis(4, t) - coeffs(t)))
        assert err <= 1e-9, f"{t=} {err=}"


@pytest.mark.unit
def test_derivative_matrix_examples():
    np.testing.assert_array_equal(derivative_matrix(1, 1), [[-1], [1]])
    np.testing.assert_array_equal(
        derivative_matrix(3, 1),
        [[-3, 0, 0], [3, -3, 0], [0, 3, -3], [0, 0, 3]],
    )
    assert derivative_matrix(5, 2).shape == (6, 4)
    np.testing.assert_array_equal(derivative_matrix(4, 0), np.eye(5))
    with pytest.raises(DomainError):
        derivative_matrix(2, 3)


@pytest.mark.unit
def test_third_derivative_of_cubic_is_six_a3(rng):
    for _ in range(10):
        P = ControlPoints(rng.normal(size=(2, 4)))
        a3 = coeffs_from_control_points(P).coeffs[:, 3]
        np.testing.assert_allclose((P.points @ derivative_matrix(3, 3))[:, 0], 6.0 * a3, atol=1e-10)


@pytest.mark.unit
def test_basis_matrices_bundle():
    basis = BasisMatrices.for_degree(3)
    assert set(basis.H) == {(3, q) for q in range(4)}
    np.testing.assert_array_equal(basis.H[(3, 1)], derivative_matrix(3, 1))
    np.testing.assert_array_equal(basis.D, basis_transform(3))
    assert abs(np.linalg.det(basis.D.astype(float))) > 1e-9


@pytest.mark.unit
def test_evaluate_endpoints_and_derivative(rng):
    P = ControlPoints(rng.normal(size=(2, 4)))
    np.testing.assert_allclose(evaluate(P, 0.0), P.first)
    np.testing.assert_allclose(evaluate(P, 1.0), P.last)

    line = ControlPoints([[0.0, 1.0]])
    for t in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(evaluate(line, t, 1), [1.0])


@pytest.mark.unit
def test_derivative_matches_finite_differences(rng):
    P = ControlPoints(rng.normal(size=(2, 4)))
    h = 1e-5
    for t in rng.uniform(0.01, 0.99, 100):
        fd = (evaluate(P, t + h) - evaluate(P, t - h)) / (2 * h)
        err = np.max(np.abs(evaluate(P, t, 1) - fd))
        assert err <= 1e-5, f"{t=} {err=}"


@pytest.mark.unit
def test_evaluate_stays_in_control_point_hull(rng):
    P = ControlPoints(rng.normal(size=(2, 4)))
    for t in rng.uniform(0.0, 1.0, 20):
        assert in_convex_hull(P.points, evaluate(P, t), 1e-8)


@pytest.mark.unit
def test_hull_bounds_first_derivative_by_hand():
    bounds = hull_bounds(ControlPoints([[0.0, 0.0, 1.0, 1.0]]))
    np.testing.assert_array_equal(bounds[0], [[0.0, 0.0, 1.0, 1.0]])
    np.testing.assert_allclose(bounds[1], [[0.0, 3.0, 0.0]])


@pytest.mark.unit
def test_derivatives_lie_in_hull_bounds(rng):
    for _ in range(100):
        P = ControlPoints(rng.normal(size=(2, 4)))
        q = int(rng.integers(0, 4))
        t = float(rng.uniform())
        assert in_convex_hull(hull_bounds(P)[q], evaluate(P, t, q), 1e-8), f"{q=} {t=}"


@pytest.mark.unit
def test_in_convex_hull_rejects_outside_point():
    square = np.array([[0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
    assert in_convex_hull(square, [0.5, 0.5])
    assert not in_convex_hull(square, [1.5, 0.5])


@pytest.mark.unit
def test_closest_parameter_examples():
    P = ControlPoints([[0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 0.5, 1.0]])
    t = closest_parameter(P, evaluate(P, 0.3))
    assert abs(t - 0.3) <= 1e-3, f"{t=}"

    line = ControlPoints([[0.0, 1.0]])
    assert closest_parameter(line, [2.0]) == 1.0
    assert closest_parameter(line, [-3.0]) == 0.0


@pytest.mark.unit
def test_closest_parameter_matches_fine_grid(rng):
    fine = np.linspace(0.0, 1.0, 100_001)
    for _ in range(10):
        P = ControlPoints(rng.normal(size=(2, 4)))
        point = rng.normal(size=2)
        samples = P.points @ bernstein_basis_many(3, fine)
        brute = np.min(np.sum((samples - point[:, None]) ** 2, axis=0))
        t = closest_parameter(P, point)
        found = np.sum((evaluate(P, t) - point) ** 2)
        assert found <= brute + 1e-6, f"{found=} {brute=}"


@pytest.mark.unit
def test_control_points_validation():
    with pytest.raises(DomainError):
        ControlPoints([[0.0, np.nan]])
    constant = ControlPoints([[2.0]])
    assert constant.is_constant and constant.degree == 0
    assert PolynomialCoeffs([[1.0, 2.0]])(0.5)[0] == pytest.approx(2.0)
