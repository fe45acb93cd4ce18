import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import rand_herm
from swextrap.densekit import op_norm
from swextrap.errors import DimensionMismatch, NonHermitian, OutOfDomain
from swextrap.hamiltonian import (PAULI, LocalHamiltonian, LocalOperator, ParamFamily, PartitionedFamily,
                                  assemble, commutator, f_norm, from_json_terms, pauli_decompose, pauli_word,
                                  restrict, to_json_terms)
from swextrap.lattice import FFunction, chain, normalize
from swextrap.models import field, ising

X, Y, Z, I2 = PAULI["X"], PAULI["Y"], PAULI["Z"], np.eye(2)
F_G = FFunction("exp", 1, 1.0)


def random_2local(rng, lat, p=0.8):
    terms = {}
    for i in lat.sites:
        terms[(i,)] = rand_herm(rng, 2)
        if i + 1 < lat.n and rng.random() < p:
            terms[(i, i + 1)] = rand_herm(rng, 4)
    return LocalHamiltonian(lat, terms)


class TestPauliDecompose:
    def test_identity(self):
        H = pauli_decompose(np.eye(4), chain(2))
        assert H.supports == [()]
        assert H.identity_coeff == pytest.approx(1)

    def test_two_fields(self):
        M = np.kron(Z, I2) + np.kron(I2, Z)
        H = pauli_decompose(M, chain(2))
        assert H.supports == [(0,), (1,)]
        np.testing.assert_allclose(H.terms[(0,)], Z, atol=1e-14)

    def test_random_roundtrip(self, rng):
        M = rand_herm(rng, 8)
        H = pauli_decompose(M, chain(3))
        assert np.abs(assemble(H) - M).max() <= 1e-10

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pauli_decompose(np.eye(3), chain(2))


class TestAssemble:
    def test_empty(self):
        np.testing.assert_array_equal(assemble(LocalHamiltonian(chain(2))), np.zeros((4, 4)))

    def test_single_term(self):
        H = LocalHamiltonian(chain(2), {(0,): Z})
        np.testing.assert_array_equal(assemble(H), np.kron(Z, I2))

    def test_tfim_three(self):
        lat = chain(3)
        H = ising(lat, 1.0, 0.7, 0.0)
        k = lambda *ms: np.kron(np.kron(ms[0], ms[1]), ms[2])
        ref = -(k(Z, Z, I2) + k(I2, Z, Z)) - 0.7 * (k(X, I2, I2) + k(I2, X, I2) + k(I2, I2, X))
        np.testing.assert_allclose(assemble(H), ref, atol=1e-14)

    def test_unsorted_support(self):
        lat = chain(3)
        H = LocalHamiltonian(lat, {(2, 0): np.kron(X, Z)})
        assert H.supports == [(0, 2)]
        np.testing.assert_allclose(assemble(H), np.kron(np.kron(Z, I2), X))

    def test_non_hermitian_rejected(self):
        with pytest.raises(NonHermitian):
            LocalHamiltonian(chain(1), {(0,): np.array([[0, 1], [0, 0]])})


class TestFNorm:
    def test_zero(self):
        assert f_norm(LocalHamiltonian(chain(3)), F_G) == 0

    def test_single_site(self):
        H = LocalHamiltonian(chain(3), {(1,): 2.5 * Z})
        assert f_norm(H, F_G) == pytest.approx(2.5 / F_G(0))

    def test_nn_chain_exhaustive(self):
        lat = chain(6)
        H = LocalHamiltonian(lat, {(i, i + 1): np.kron(Z, Z) for i in range(5)})
        best = 0.0
        for i in range(6):
            for j in range(6):
                s = sum(1.0 for a in range(5) if {i, j} <= {a, a + 1})
                best = max(best, s / F_G(abs(i - j)))
        assert f_norm(H, F_G) == pytest.approx(best)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.floats(0.5, 2.0), st.integers(0, 2 ** 32 - 1))
    def test_commutator_bound(self, n, a, seed):
        r = np.random.default_rng(seed)
        lat = chain(n)
        F = normalize(FFunction("exp", 1, a), lat)
        Xh, Yh = random_2local(r, lat), random_2local(r, lat)
        assert f_norm(commutator(Xh, Yh), F) <= 4 * f_norm(Xh, F) * f_norm(Yh, F)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
    def test_subadditive(self, n, seed):
        r = np.random.default_rng(seed)
        lat = chain(n)
        Xh, Yh = random_2local(r, lat), random_2local(r, lat)
        assert f_norm(Xh + Yh, F_G) <= f_norm(Xh, F_G) + f_norm(Yh, F_G) + 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
    def test_decompose_assemble_roundtrip(self, n, seed):
        r = np.random.default_rng(seed)
        lat = chain(n)
        H = random_2local(r, lat)
        back = pauli_decompose(assemble(H), lat)
        assert np.abs(assemble(back) - assemble(H)).max() <= 1e-12


class TestCommutator:
    def test_matches_dense(self, rng):
        lat = chain(4)
        A, B = random_2local(rng, lat), random_2local(rng, lat)
        C = commutator(A, B)
        Ad, Bd = assemble(A), assemble(B)
        np.testing.assert_allclose(assemble(C), Ad @ Bd - Bd @ Ad, atol=1e-12)

    def test_disjoint_supports_skip(self):
        lat = chain(3)
        A = LocalHamiltonian(lat, {(0,): X})
        B = LocalHamiltonian(lat, {(2,): Z})
        assert len(commutator(A, B)) == 0


class TestRestrict:
    def test_full_region(self):
        lat = chain(4)
        H = ising(lat, 1, 0.5)
        R, bound = restrict(H, lat.sites, F_G)
        assert bound == 0
        np.testing.assert_array_equal(assemble(R), assemble(H))

    def test_empty_region(self):
        lat = chain(5)
        H = ising(lat, 1, 0.5)
        R, bound = restrict(H, [], F_G)
        assert len(R) == 0
        assert bound >= op_norm(assemble(H))

    def test_half_chain(self):
        lat = chain(6)
        H = ising(lat, 1, 0.5)
        R, bound = restrict(H, [0, 1, 2], F_G)
        assert (2, 3) not in R.terms
        assert all(set(s) <= {0, 1, 2} for s in R.terms)
        assert op_norm(assemble(H) - assemble(R)) <= bound


class TestFamilies:
    def test_constant_family(self):
        lat = chain(2)
        fam = ParamFamily(lat, {(0,): [Z]})
        np.testing.assert_array_equal(assemble(fam.eval(0.3)), assemble(fam.eval(-2)))
        assert fam.degree == 0

    def test_linear_at_zero(self):
        lat = chain(3)
        H0 = ising(lat, 1, 0.4)
        fam = ParamFamily.linear(H0, field(lat))
        np.testing.assert_allclose(assemble(fam.eval(0.0)), assemble(H0))
        np.testing.assert_allclose(assemble(fam.derivative(0.7)), assemble(field(lat)))

    def test_domain(self):
        fam = ParamFamily(chain(1), {(0,): [Z, X]}, domain=(0, 1))
        with pytest.raises(OutOfDomain):
            fam.eval(1.5)

    def test_partitioned(self):
        lat = chain(3)
        fam = ParamFamily.linear(LocalHamiltonian(lat, {}), field(lat))
        p = PartitionedFamily(fam, {0})
        M = assemble(p.eval2(1.0, 0.0))
        np.testing.assert_allclose(M, np.kron(np.kron(X, I2), I2))
        np.testing.assert_allclose(assemble(p.eval2(0.5, 0.5)), assemble(fam.eval(0.5)))


class TestSerialization:
    def test_pauli_roundtrip(self, rng):
        lat = chain(3)
        H = random_2local(rng, lat)
        back = from_json_terms(to_json_terms(H), lat)
        np.testing.assert_allclose(assemble(back), assemble(H), atol=1e-14)

    def test_dense_roundtrip(self, rng):
        lat = chain(2)
        H = random_2local(rng, lat)
        back = from_json_terms(to_json_terms(H, dense=True), lat)
        np.testing.assert_allclose(assemble(back), assemble(H), atol=1e-15)

    def test_full_width_word(self):
        lat = chain(3)
        H = from_json_terms([{"support": [0, 2], "pauli_terms": [{"word": "XIZ", "coeff": 2.0}]}], lat)
        np.testing.assert_allclose(H.terms[(0, 2)], 2 * pauli_word("XZ"))

    def test_local_operator_algebra(self):
        lat = chain(2)
        A = LocalOperator(lat, {(0,): X})
        B = A * 1j
        assert type(B) is LocalOperator
        np.testing.assert_allclose(assemble(A - A), np.zeros((4, 4)))
