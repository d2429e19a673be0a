import json
import math

import numpy as np
import pytest

from zygmund.trig import (
    FAILS,
    HOLDS_DERIVATIVE,
    HOLDS_EXTREMUM,
    TrigPolynomial,
    check_condition_H,
    default_directions,
    direct_cosine_sum,
    evaluate,
    imag_residue,
    jet2,
    seminorm_bounds,
    sphere_points,
)

from oracles import central_gradient, central_jacobian, cosine_sum


def test_cosine_values():
    phi = TrigPolynomial.cosine(1)
    x = np.array([0.0, 0.25, 0.5])
    assert np.allclose(evaluate(phi, x), [1.0, 0.0, -1.0], atol=1e-15)


def test_cos_sum_d3_at_origin():
    phi = TrigPolynomial.cos_sum(3)
    assert evaluate(phi, np.zeros(3)) == pytest.approx(3.0)


def test_hermitian_violation_rejected():
    with pytest.raises(ValueError, match="Hermitian"):
        TrigPolynomial(1, {(1,): 1.0, (-1,): 0.5})


def test_symmetrize_warns_and_repairs():
    with pytest.warns(UserWarning):
        phi = TrigPolynomial.from_terms(1, {(1,): 1.0, (-1,): 0.5}, symmetrize=True)
    assert phi.terms[(1,)] == pytest.approx(0.75)
    assert np.abs(imag_residue(phi, np.linspace(0, 1, 17))).max() < 1e-15


def test_wrong_frequency_length():
    with pytest.raises(ValueError):
        TrigPolynomial(2, {(1,): 1.0, (-1,): 1.0})


@pytest.mark.parametrize("d", [1, 2, 3])
def test_real_and_periodic(d):
    rng = np.random.default_rng(d)
    phi = TrigPolynomial.random(d, 3, rng)
    x = rng.random((50, d))
    v = evaluate(phi, x)
    assert np.all(np.isreal(v))
    for i in range(d):
        assert np.allclose(evaluate(phi, x + np.eye(d)[i]), v, atol=1e-12)
    assert np.abs(imag_residue(phi, x)).max() < 1e-12


@pytest.mark.parametrize("d", [1, 2])
def test_evaluate_matches_direct_sum(d):
    rng = np.random.default_rng(10 + d)
    phi = TrigPolynomial.random(d, 6, rng, max_freq=8)
    x = rng.random((40, d))
    assert np.allclose(evaluate(phi, x), cosine_sum(phi.terms, x), atol=1e-12)
    assert np.allclose(direct_cosine_sum(phi, x), cosine_sum(phi.terms, x), atol=1e-12)


def test_jet2_against_finite_differences():
    rng = np.random.default_rng(3)
    phi = TrigPolynomial.random(2, 4, rng)
    p = rng.random(2)
    _, g, H = jet2(phi, p)
    h = 1e-5
    assert np.allclose(g, central_gradient(lambda q: float(evaluate(phi, q)), p, h), rtol=1e-6, atol=1e-6)
    Hfd = central_jacobian(lambda q: jet2(phi, q)[1], p, h)
    assert np.allclose(H, Hfd, rtol=1e-6, atol=1e-5)


def test_seminorm_bounds_are_sound():
    rng = np.random.default_rng(4)
    phi = TrigPolynomial.random(2, 5, rng)
    b = seminorm_bounds(phi, 0.5)
    x = rng.random((2000, 2))
    v, g, H = jet2(phi, x)
    assert np.abs(v).max() <= b.sup_abs
    assert np.linalg.norm(g, axis=1).max() <= b.sup_grad
    assert np.linalg.norm(H, ord=2, axis=(1, 2)).max() <= b.sup_hess
    # Hoelder quotients of Hessian entries on random pairs
    y = x + rng.normal(scale=1e-2, size=x.shape)
    _, _, Hy = jet2(phi, y)
    q = np.abs(H - Hy).max(axis=(1, 2)) / np.linalg.norm(x - y, axis=1) ** 0.5
    assert q.max() <= b.hess_holder_alpha


def test_seminorm_alpha_range():
    with pytest.raises(ValueError):
        seminorm_bounds(TrigPolynomial.cosine(1), 1.0)


def test_serialization_roundtrip():
    phi = TrigPolynomial.random(3, 4, np.random.default_rng(5))
    back = TrigPolynomial.from_json(phi.to_json())
    assert back.terms == phi.terms
    assert json.loads(phi.to_json())["d"] == 3


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError):
        TrigPolynomial.from_dict({"d": 1, "terms": [], "extra": 1})


def test_l1_weight():
    phi = TrigPolynomial.cosine(1, amplitude=2.0)
    assert phi.l1_weight(0) == pytest.approx(2.0)
    assert phi.l1_weight(1) == pytest.approx(4 * math.pi)


def test_condition_H_cos_sum_holds_everywhere():
    phi = TrigPolynomial.cos_sum(2)
    res = check_condition_H(phi, default_directions(2, 16), 1.0, 1e-3)
    assert all(r.verdict == HOLDS_EXTREMUM for r in res)


def test_condition_H_sine_holds_by_derivative():
    res = check_condition_H(TrigPolynomial.sine(1), [[1.0]], 1.0, 1e-3)
    assert res[0].verdict == HOLDS_DERIVATIVE


def test_condition_H_fails_for_constant_profile():
    # phi(x) = cos(2 pi x_1) is constant along e_2
    res = check_condition_H(TrigPolynomial.cosine(2), [[0.0, 1.0]], 1.0, 1e-3)
    assert res[0].verdict == FAILS


def test_condition_H_fails_for_crossing_profile():
    # cos(2 pi x) - 2 cos(4 pi x) rises near 0 and drops below phi(0) at x = 1/2
    phi = TrigPolynomial.from_real_modes(1, [((1,), 1.0, 0.0), ((2,), -2.0, 0.0)])
    res = check_condition_H(phi, [[1.0]], 1.0, 1e-3)
    assert res[0].verdict == FAILS


def test_condition_H_rejects_bad_directions():
    phi = TrigPolynomial.cos_sum(2)
    with pytest.raises(ValueError):
        check_condition_H(phi, [[1.0, 1.0]], 1.0, 1e-3)
    with pytest.raises(ValueError):
        check_condition_H(phi, np.zeros((0, 2)), 1.0, 1e-3)


def test_sphere_points_prefix_stable():
    a = sphere_points(3, 10, seed=2)
    b = sphere_points(3, 20, seed=2)
    assert np.array_equal(a, b[:10])
    assert np.allclose(np.linalg.norm(b, axis=1), 1)


def test_random_too_many_modes():
    with pytest.raises(ValueError):
        TrigPolynomial.random(1, 4, np.random.default_rng(0), max_freq=3)
