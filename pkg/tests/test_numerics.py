import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from csframes.fock import TruncationPolicy
from csframes.numerics import block_dev, collinearity_residual, converged_block, interior, is_nonincreasing


def test_interior():
    assert interior(TruncationPolicy(20)) == 17
    assert interior(TruncationPolicy(20), degree=2) == 16
    assert interior(TruncationPolicy(3, edge_margin=2), degree=2) == 1


def test_block_dev():
    A = np.zeros((4, 4))
    B = np.zeros((4, 4))
    B[3, 3] = 1
    assert block_dev(A, B, 3) == 0 and block_dev(A, B, 4) == 1


def test_converged_block_detects_cutoff_corruption():
    def build(tr):
        a = np.diag(np.sqrt(np.arange(1, tr.n_max)), 1)
        return [a @ a.T]

    k, (m,) = converged_block(build, TruncationPolicy(20))
    # a a^+ is exact except its last diagonal entry
    assert k == interior(TruncationPolicy(20))
    assert m.shape == (20, 20)


@settings(max_examples=50)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=3, max_size=8), st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_collinearity_of_multiples(u, c):
    u = np.asarray(u)
    if np.linalg.norm(u) < 1e-3:
        return
    assert collinearity_residual(u, c * u) < 1e-12


def test_collinearity_orthogonal():
    assert collinearity_residual(np.array([1, 0]), np.array([0, 1])) == 1.0
    assert collinearity_residual(np.zeros(2), np.zeros(2)) == 0.0


def test_is_nonincreasing():
    assert is_nonincreasing([3, 2, 2, 1], 0)
    assert not is_nonincreasing([1, 2], 0)
    assert is_nonincreasing([1e-13, 2e-13], 1e-12)
