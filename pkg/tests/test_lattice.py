import math

import numpy as np
import pytest

from zygmund.harmonic import LinearField, WeierstrassField, evaluate_jets
from zygmund.lattice import (
    CarlesonBox,
    NadicCube,
    box_quadrature,
    descendants,
    face_average_gradient,
    face_average_gradients,
)
from zygmund.trig import TrigPolynomial


def test_root_and_children_tile():
    Q = NadicCube.root(2, N=3)
    kids = Q.children()
    assert len(kids) == 9
    assert sum(c.volume for c in kids) == pytest.approx(Q.volume)
    assert [c.address for c in kids[:3]] == ["1:0,0", "1:0,1", "1:0,2"]


def test_address_roundtrip_and_ancestors():
    Q = NadicCube.root(2, N=2, corner=(1.0, -1.0), side=2.0)
    q = descendants(Q, 3)[37]
    assert Q.with_address(q.address) == q
    anc = q.ancestors()
    assert [a.j for a in anc] == [2, 1, 0]
    assert all(a.contains(q) for a in anc)
    assert not q.contains(anc[0])
    assert q.parent() == anc[0]


def test_geometry_recomputed_from_root():
    Q = NadicCube.root(1, N=2)
    q = Q.with_address("40:1")
    assert q.corner[0] == 2.0**-40
    assert q.side == 2.0**-40


def test_index_validation():
    with pytest.raises(ValueError):
        NadicCube((0.0,), 1.0, 2, 1, (2,))
    with pytest.raises(ValueError):
        NadicCube((0.0,), 1.0, 1, 0, (0,))


def test_descendant_count():
    assert len(descendants(NadicCube.root(3), 2)) == 64


def test_midpoints_inside():
    q = NadicCube.root(2).with_address("2:1,3")
    p = q.midpoints(4)
    assert p.shape == (16, 2)
    assert np.all((p > q.corner) & (p < q.corner + q.side))


def test_carleson_box():
    q = NadicCube.root(1).with_address("1:1")
    box = CarlesonBox(q, 0.5)
    assert box.y_range == (0.25, 0.5)
    assert box.volume == pytest.approx(0.125)
    with pytest.raises(ValueError):
        CarlesonBox(q, 1.0)


def test_box_quadrature_polynomial_exactness():
    # midpoint rule is exact for affine integrands
    box = CarlesonBox(NadicCube.root(2), 0.5)
    val = box_quadrature(box, lambda x, y: 1 + 2 * x[:, 0] - x[:, 1] + 3 * y, m=2)
    exact = 0.5 * (1 + 1 - 0.5) + 3 * (1 - 0.25) / 2
    assert val == pytest.approx(exact)


def test_box_quadrature_error_estimate():
    box = CarlesonBox(NadicCube.root(1), 0.1)
    val, err = box_quadrature(box, lambda x, y: np.exp(x[:, 0] * y), m=8, estimate_error=True)
    # int_0.1^1 (e^y - 1)/y dy by a fine rule
    t = np.linspace(0.1, 1, 200001)
    g = (np.exp(t) - 1) / t
    exact = float(np.sum((g[1:] + g[:-1]) / 2 * np.diff(t)))
    assert abs(val - exact) <= err


def test_face_average_linear_field():
    g = [0.3, -1.2, 2.0]
    L = LinearField(2, g)
    avgs = face_average_gradients(L, descendants(NadicCube.root(2), 2), m=3)
    assert np.allclose(avgs, g)


def test_face_average_tangential_is_difference_quotient():
    # the x-average of dF/dx over [a, a + l] at height l is (F(a+l, l) - F(a, l)) / l
    W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
    for addr in ["1:0", "3:5", "6:17"]:
        q = NadicCube.root(1).with_address(addr)
        a, l = q.corner[0], q.side
        v = evaluate_jets(W, np.array([a, a + l]), l).value
        ref = (v[1] - v[0]) / l
        got = face_average_gradient(W, q, m=64)[0]
        assert got == pytest.approx(ref, rel=1e-3, abs=1e-3)


def test_face_average_batch_equals_single():
    W = WeierstrassField(TrigPolynomial.cos_sum(2), 2.0)
    cubes = descendants(NadicCube.root(2), 2)
    batch = face_average_gradients(W, cubes)
    single = np.array([face_average_gradient(W, q) for q in cubes])
    assert np.array_equal(batch, single)
    assert face_average_gradients(W, []).shape == (0, 3)


def test_midpoints_converge():
    W = WeierstrassField(TrigPolynomial.cosine(1), 2.0)
    q = NadicCube.root(1).with_address("2:1")
    errs = [abs(face_average_gradient(W, q, m)[0] - face_average_gradient(W, q, 256)[0]) for m in (8, 16, 32)]
    assert errs[2] < errs[1] < errs[0]
    assert math.isfinite(errs[0])
