"""Symplectic core: structure matrix, Hamilton matrices, classification,
logarithm, polar splitting."""

import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings, strategies as st

import loxokit as lx


def rng_for(seed):
    return np.random.Generator(np.random.Philox(seed))


def random_symplectic(rng, m, scale=0.4):
    """exp of a random Hamilton matrix is symplectic by construction."""
    dim = 2 * m
    C = scale * rng.standard_normal((dim, dim))
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(dim, C + C.T))
    return la.expm(B.entries)


# ---------------------------------------------------------------------------
# standard structure matrix
# ---------------------------------------------------------------------------

def test_structure_matrix_m1():
    assert np.array_equal(lx.standard_symplectic_matrix(1),
                          [[0.0, -1.0], [1.0, 0.0]])


def test_structure_matrix_m2_blocks():
    J = lx.standard_symplectic_matrix(2)
    I2 = np.eye(2)
    assert np.array_equal(J[:2, 2:], -I2)
    assert np.array_equal(J[2:, :2], I2)
    assert np.array_equal(J[:2, :2], 0 * I2)
    assert np.array_equal(J[2:, 2:], 0 * I2)


@given(st.integers(min_value=1, max_value=8))
def test_structure_matrix_squares_to_minus_identity(m):
    J = lx.standard_symplectic_matrix(m)
    assert np.array_equal(J @ J, -np.eye(2 * m))


# ---------------------------------------------------------------------------
# Hamilton matrix assembly
# ---------------------------------------------------------------------------

def test_hamilton_matrix_dilation():
    lam = 0.7
    Q = np.array([[0.0, lam], [lam, 0.0]])
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(2, Q))
    assert np.allclose(B.entries, np.diag([lam, -lam]), atol=1e-14)


def test_hamilton_matrix_harmonic():
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(2, np.eye(2)))
    assert np.allclose(B.entries, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-14)
    assert np.allclose(np.sort_complex(np.linalg.eigvals(B.entries)),
                       [-1j, 1j], atol=1e-12)


def test_hamilton_matrix_complex_pair_eigenvalues():
    # 4x4 coefficient array whose generator has the complex quadruple
    # 1 + i: assemble Q from the known rotation-scaling normal form and
    # check the dense eigensolver recovers {1 +- i, -1 -+ i}
    Lam = np.array([[1.0, -1.0], [1.0, 1.0]])
    B_nf = np.block([[Lam.T, np.zeros((2, 2))], [np.zeros((2, 2)), -Lam]])
    J = lx.standard_symplectic_matrix(2)
    Q = J @ B_nf
    assert np.allclose(Q, Q.T, atol=1e-14)
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(4, Q))
    got = np.sort_complex(np.linalg.eigvals(B.entries))
    want = np.sort_complex([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
    assert np.allclose(got, want, atol=1e-10)


def test_hamilton_matrix_rejects_asymmetric():
    with pytest.raises(ValueError):
        lx.QuadraticHamiltonian(2, np.array([[0.0, 1.0], [0.5, 0.0]]))


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=0, max_value=2**31 - 1),
       st.integers(min_value=1, max_value=4))
def test_hamilton_matrix_structure_relation(seed, m):
    rng = rng_for(seed)
    C = rng.standard_normal((2 * m, 2 * m))
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(2 * m, C + C.T))
    assert lx.hamilton_residual(B.entries) <= 1e-10


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def test_classify_hyperbolic_map():
    c = lx.classify(np.diag([np.e, 1 / np.e]), mode=lx.POINCARE_MAP)
    assert len(c.groups) == 1
    group = c.groups[0]
    assert isinstance(group, lx.RealHyperbolicPair)
    assert group.lam == pytest.approx(1.0, abs=1e-12)
    assert c.is_loxodromic
    assert not c.has_negative_real


def test_classify_rotation_is_elliptic():
    th = 0.3
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    c = lx.classify(R, mode=lx.POINCARE_MAP)
    assert isinstance(c.groups[0], lx.EllipticGroup)
    assert c.groups[0].theta == pytest.approx(0.3, abs=1e-12)
    assert not c.is_loxodromic


def test_classify_negative_real_axis():
    c = lx.classify(np.diag([-np.e**2, -np.e**-2]), mode=lx.POINCARE_MAP)
    assert c.is_loxodromic
    assert c.has_negative_real


def test_classify_rejects_nonsymplectic():
    with pytest.raises(lx.NotSymplectic):
        lx.classify(np.diag([2.0, 2.0]), mode=lx.POINCARE_MAP)


@settings(deadline=None, max_examples=30)
@given(st.integers(min_value=0, max_value=2**31 - 1),
       st.integers(min_value=1, max_value=3))
def test_classify_map_and_generator_agree(seed, m):
    # eigenvalues of exp(B) are the exponentials of those of B
    rng = rng_for(seed)
    C = 0.4 * rng.standard_normal((2 * m, 2 * m))
    B = lx.hamilton_matrix(lx.QuadraticHamiltonian(2 * m, C + C.T)).entries
    mu = np.sort_complex(np.linalg.eigvals(la.expm(B)))
    ex = np.sort_complex(np.exp(np.linalg.eigvals(B)))
    assert np.allclose(mu, ex, atol=1e-8)


def test_group_counts_cover_dimension():
    rng = rng_for(7)
    S = random_symplectic(rng, 3)
    c = lx.classify(S, mode=lx.POINCARE_MAP)
    total = 0
    for g in c.groups:
        if isinstance(g, lx.ComplexHyperbolicQuad):
            total += 4 * g.chain_size
        elif isinstance(g, lx.RealHyperbolicPair):
            total += 2 * g.chain_size
        else:
            total += 2
    assert total == 6


# ---------------------------------------------------------------------------
# symplectic logarithm
# ---------------------------------------------------------------------------

def test_log_of_diagonal():
    B = lx.symplectic_log(np.diag([np.e, 1 / np.e]))
    assert np.allclose(B.entries, np.diag([1.0, -1.0]), atol=1e-12)


def test_log_of_rotation_roundtrip():
    th = 0.2
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    B = lx.symplectic_log(R)
    assert np.allclose(np.abs(B.entries), [[0.0, th], [th, 0.0]], atol=1e-12)
    assert la.norm(la.expm(B.entries) - R) <= 1e-10


def test_log_rejects_negative_real_axis():
    with pytest.raises(lx.NegativeRealEigenvalue):
        lx.symplectic_log(np.diag([-np.e**2, -np.e**-2]))


@settings(deadline=None, max_examples=50)
@given(st.integers(min_value=0, max_value=2**31 - 1),
       st.integers(min_value=1, max_value=4))
def test_log_exp_roundtrip(seed, m):
    rng = rng_for(seed)
    S = random_symplectic(rng, m)
    eigs = np.linalg.eigvals(S)
    # exp-generated maps stay off the negative real axis
    assert not np.any((eigs.real < 0) & (np.abs(eigs.imag) < 1e-12))
    B = lx.symplectic_log(S)
    assert la.norm(la.expm(B.entries) - S) <= 1e-8 * max(1.0, la.norm(S))
    assert lx.hamilton_residual(B.entries) <= 1e-8
    # principal branch
    assert np.all(np.abs(np.linalg.eigvals(B.entries).imag) < np.pi)


# ---------------------------------------------------------------------------
# symplectic polar splitting
# ---------------------------------------------------------------------------

def test_polar_of_positive_diagonal():
    K = np.diag([2.0, 0.5])
    Qo, Pp = lx.symplectic_polar(K)
    assert np.allclose(Qo.entries, np.eye(2), atol=1e-12)
    assert np.allclose(Pp.entries, K, atol=1e-12)


def test_polar_of_rotation():
    th = 0.8
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    Qo, Pp = lx.symplectic_polar(R)
    assert np.allclose(Qo.entries, R, atol=1e-12)
    assert np.allclose(Pp.entries, np.eye(2), atol=1e-12)


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_polar_factors_match_svd_oracle(seed):
    rng = rng_for(seed)
    K = random_symplectic(rng, 2) @ random_symplectic(rng, 2)
    Qo, Pp = lx.symplectic_polar(K)
    U, P = la.polar(K)            # SVD-based oracle
    assert la.norm(Qo.entries - U) <= 1e-9 * max(1.0, la.norm(U))
    assert la.norm(Pp.entries - P) <= 1e-9 * max(1.0, la.norm(P))
    assert la.norm(Qo.entries @ Pp.entries - K) <= 1e-9 * la.norm(K)
    # both factors are themselves symplectic
    assert lx.symplectic_residual(Qo.entries) <= 1e-9
    assert lx.symplectic_residual(Pp.entries) <= 1e-9
    assert np.allclose(Qo.entries.T @ Qo.entries, np.eye(4), atol=1e-9)
    assert np.min(np.linalg.eigvalsh(Pp.entries)) > 0
