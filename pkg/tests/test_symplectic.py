import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from csframes import families as fa
from csframes.errors import NotSymplectic, TruncationInsufficient
from csframes.fock import TruncationPolicy, position_wavefunction
from csframes.symplectic import (
    M_uv,
    covariance_deviation,
    metaplectic_operator,
    rotation,
    sp2_compose,
    sp2_decompose,
    squeezed_state,
    squeezed_wavefunction,
    squeezed_wavefunction_check,
)


def test_factor_matrices_are_symplectic():
    for M in (M_uv(2.0, 0.3), rotation(0.7), sp2_compose(-0.4, 0.5, 1.1)):
        assert np.linalg.det(M) == pytest.approx(1.0)


@settings(max_examples=80, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10), st.floats(0.01, 2 * np.pi))
def test_decompose_roundtrip(v, u, theta):
    M = sp2_compose(v, u, theta)
    v2, u2, t2 = sp2_decompose(M, tol=1e-9)
    assert np.allclose(sp2_compose(v2, u2, t2), M, atol=1e-9)
    assert u2 == pytest.approx(u, rel=1e-9) and v2 == pytest.approx(v, abs=1e-8)


def test_decompose_identity_and_errors():
    assert sp2_decompose(np.eye(2)) == (0.0, 1.0, 2 * np.pi)
    with pytest.raises(NotSymplectic):
        sp2_decompose(np.diag([2.0, 2.0]))
    with pytest.raises(NotSymplectic):
        sp2_decompose(np.eye(3))


def test_inverse_is_dual_pair():
    u, v = 2.0, 0.3
    assert np.allclose(np.linalg.inv(M_uv(u, v)), M_uv(1 / u, -v / u))


@pytest.mark.parametrize("u,v", [(2.0, 0.3), (0.5, -0.4), (1.0, 0.0), (1.3, 0.8)])
def test_covariance(u, v):
    assert covariance_deviation(u, v, 2 * np.pi, TruncationPolicy(60)) < 1e-9


def test_covariance_with_rotation():
    assert covariance_deviation(1.5, 0.2, 0.9, TruncationPolicy(60)) < 1e-9


def test_metaplectic_operator_unitary_on_low_block():
    U = metaplectic_operator(2.0, 0.3, 2 * np.pi, TruncationPolicy(80)).matrix
    # higher columns of a squeeze spread past the cutoff
    k = 10
    assert np.max(np.abs((U.conj().T @ U)[:k, :k] - np.eye(k))) < 1e-10


def test_metaplectic_operator_tail_guard():
    with pytest.raises(TruncationInsufficient):
        metaplectic_operator(50.0, 0.0, 2 * np.pi, TruncationPolicy(10))


def test_vacuum_wavefunction():
    # u = 1, v = 0 at the origin is the oscillator ground state
    xs = np.linspace(-3, 3, 13)
    assert np.allclose(squeezed_wavefunction(1.0, 0.0, 0.0, 0.0, xs), np.pi ** -0.25 * np.exp(-xs ** 2 / 2))


@pytest.mark.parametrize("u,v,q,p", [(2.0, 0.3, 0.5, -0.3), (0.5, -0.4, -0.2, 0.4), (1.0, 0.0, 1.0, 0.0), (1.5, 0.5, 0.0, 1.0)])
def test_squeezed_wavefunction(u, v, q, p):
    assert squeezed_wavefunction_check(u, v, q, p, np.linspace(-4, 4, 81)) < 1e-8


def test_squeezed_family_matches_state():
    u, v = 2.0, 0.3
    z = 0.2 - 0.1j
    tr = TruncationPolicy(60)
    x = M_uv(u, v) @ np.array([np.sqrt(2) * z.real, np.sqrt(2) * z.imag])
    got = fa.evaluate(fa.Squeezed(u, v), z, tr).vector
    assert np.allclose(got.coeffs, squeezed_state(u, v, x[0], x[1], tr).coeffs, atol=1e-10)
    xs = np.linspace(-3, 3, 21)
    assert np.allclose(position_wavefunction(got, xs), squeezed_wavefunction(u, v, x[0], x[1], xs), atol=1e-8)


def test_squeezed_dual_overlap_is_real_gaussian_pairing():
    # U(M)^+ U(M^{-1}) pairs two Gaussians; check against a quadrature of the wavefunctions
    u, v, z = 2.0, 0.3, 0.15 + 0.1j
    tr = TruncationPolicy(80)
    fam = fa.Squeezed(u, v)
    got = fa.evaluate(fa.dual(fam), z, tr).vector.inner(fa.evaluate(fam, z, tr).vector)
    xs = np.linspace(-12, 12, 4001)
    x1 = M_uv(u, v) @ [np.sqrt(2) * z.real, np.sqrt(2) * z.imag]
    fd = fa.dual(fam)
    x2 = M_uv(fd.u, fd.v) @ [np.sqrt(2) * z.real, np.sqrt(2) * z.imag]
    psi1 = squeezed_wavefunction(u, v, *x1, xs)
    psi2 = squeezed_wavefunction(fd.u, fd.v, *x2, xs)
    want = trapezoid(np.conj(psi2) * psi1, xs)
    assert got == pytest.approx(want, abs=1e-9)


def test_decompose_rotation_free_matrix():
    v, u, theta = sp2_decompose(M_uv(2.0, 0.3))
    assert v == pytest.approx(0.3) and u == pytest.approx(2.0) and theta == 2 * np.pi
