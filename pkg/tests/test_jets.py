import numpy as np
import pytest

from gaudinkp.jets import (
    Jet,
    finite_difference_partial,
    jm_det,
    jm_from_scalar,
    jm_mul,
    jm_power_traces,
    jm_trace,
)


def test_mul_matches_polynomial_expansion():
    # (a + 2 eps0)(b + 3 eps1) = ab + 2b eps0 + 3a eps1 + 6 eps0 eps1
    a, b = 1.5 - 0.5j, -0.7 + 0.2j
    u = Jet(np.array([a, 2.0, 0.0, 0.0]), 2)
    v = Jet(np.array([b, 0.0, 3.0, 0.0]), 2)
    w = (u * v).coeff
    assert np.allclose(w, [a * b, 2 * b, 3 * a, 6.0])


def test_generator_squares_to_zero():
    eps = Jet.variable(0.0, 0, 1)
    assert np.allclose((eps * eps).coeff, 0.0)


def test_reciprocal():
    rng = np.random.default_rng(0)
    c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    j = Jet(c, 3)
    one = (j * j.reciprocal()).coeff
    want = np.zeros(8)
    want[0] = 1.0
    assert np.allclose(one, want, atol=1e-13)


def test_reciprocal_requires_unit():
    c = np.zeros(4, dtype=complex)
    c[1] = 1.0
    with pytest.raises(ZeroDivisionError):
        Jet(c, 2).reciprocal()


def test_exp_is_homomorphism():
    rng = np.random.default_rng(1)
    a = Jet(rng.standard_normal(8) + 1j * rng.standard_normal(8), 3)
    b = Jet(rng.standard_normal(8) + 1j * rng.standard_normal(8), 3)
    lhs = (a + b).exp().coeff
    rhs = (a.exp() * b.exp()).coeff
    assert np.allclose(lhs, rhs)


def test_exp_first_order():
    # exp(c + eps)' coefficient of eps is exp(c)
    c = 0.4 - 1.1j
    j = Jet.variable(c, 0, 1)
    out = j.exp().coeff
    assert out[0] == pytest.approx(np.exp(c))
    assert out[1] == pytest.approx(np.exp(c))


def test_jet_matrix_trace_and_power():
    g = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    A = jm_from_scalar(g, 0)
    tr2 = jm_power_traces(A, 2, 0)[1]
    assert tr2.coeff.reshape(-1)[0] == pytest.approx(np.trace(g @ g))


def test_jet_det_matches_numpy_on_body():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = jm_from_scalar(g, 0)
    d = jm_det(A, 0)
    assert d.coeff.reshape(-1)[0] == pytest.approx(np.linalg.det(g))


def test_jet_det_derivative_is_adjugate_rule():
    # d/de det(g + e E) = tr(adj(g) E); check against the eps coefficient
    rng = np.random.default_rng(3)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    E = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    A = jm_from_scalar(g, 1)
    A[..., 1] = E
    d = jm_det(A, 1)
    adj = np.linalg.inv(g) * np.linalg.det(g)
    assert d.coeff[1] == pytest.approx(np.trace(adj @ E))


def test_mixed_partials_match_finite_differences():
    # top coefficient of f(g + eps0 D0 + eps1 D1) vs nested central differences
    rng = np.random.default_rng(4)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    D0 = rng.standard_normal((2, 2))
    D1 = rng.standard_normal((2, 2))

    def f(mat):
        return np.exp(0.3 * np.trace(mat) + 0.1 * np.trace(mat @ mat))

    A = jm_from_scalar(g, 2)
    A[..., 1] = D0
    A[..., 2] = D1
    traces = jm_power_traces(A, 2, 2)
    val = (traces[0] * 0.3 + traces[1] * 0.1).exp()
    got = complex(val.coeff.reshape(-1, 4)[0, 3])
    want = finite_difference_partial(f, g, [D0, D1], h=1e-4)
    assert got == pytest.approx(want, rel=1e-7)


def test_batched_broadcasting():
    # a batch of probes evaluates like each probe separately
    g = np.array([[0.5, 0.1], [0.2, -0.4]], dtype=complex)
    B = 4
    A = jm_from_scalar(g, 1, batch=(B,))
    for b in range(B):
        A[0, 0, b, 1] = b + 1.0
    tr = jm_trace(A, 1)
    assert np.allclose(tr.coeff[:, 1], np.arange(1, B + 1))
    sq = jm_mul(A, A, 1)
    for b in range(B):
        Ab = np.zeros((2, 2, 1, 2), dtype=complex)
        Ab[..., 0] = g[:, :, None]
        Ab[0, 0, 0, 1] = b + 1.0
        sq_b = jm_mul(Ab, Ab, 1)
        assert np.allclose(sq[:, :, b], sq_b[:, :, 0])
