import numpy as np
import pytest

from swextrap.densekit import op_norm, to_double
from swextrap.errors import AncillaCollision, DegreeTooHigh, InvalidArity, NonPositiveX
from swextrap.gadgets import (GadgetSpec, combine, locality_floor, random_hermitian, simulator_eval,
                              spec_from_json, spec_to_json, three_to_two, three_to_two_chain,
                              three_to_two_ladder, validate)
from swextrap.hamiltonian import PAULI, LocalHamiltonian, assemble
from swextrap.lattice import chain, complete
from swextrap.schrieffer_wolff import SWContext

X, Z, I2 = PAULI["X"], PAULI["Z"], np.eye(2)


def kron3(a, b, c):
    return np.kron(np.kron(a, b), c)


class TestThreeToTwo:
    def test_zzz(self):
        v = validate(three_to_two("Z", "Z", "Z"))
        assert v.is_gadget
        assert v.target_error <= 1e-9
        assert op_norm(assemble(v.H_tar) - kron3(Z, Z, Z)) <= 1e-9

    def test_identity_inputs(self):
        g = three_to_two("I", "I", "I")
        v = validate(g)
        assert v.is_gadget and v.target_error <= 1e-8
        assert op_norm(assemble(v.H_tar) - np.eye(8)) <= 1e-8

    def test_random_triple(self, rng):
        hs = [random_hermitian(rng) for _ in range(3)]
        v = validate(three_to_two(*hs))
        assert v.is_gadget
        assert op_norm(assemble(v.H_tar) - kron3(*hs)) <= 1e-8
        assert 0 <= v.eta < 1

    def test_two_local_ladder(self, rng):
        g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
        assert max(len(s) for L in g.ctx.ladder for s in L.terms) <= 2
        assert locality_floor(3, 2) <= g.degree == 3

    def test_random_norm_range(self, rng):
        for _ in range(20):
            n = op_norm(random_hermitian(rng, 2.0))
            assert 0.5 - 1e-12 <= n <= 2.0 + 1e-12

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            three_to_two(np.array([[0, 1], [0, 0]]), "Z", "Z")


class TestSecondOrder:
    def test_flip_ladder(self, rng):
        lat = chain(2)
        h = random_hermitian(rng)
        H1 = LocalHamiltonian(lat, {(0, 1): np.kron(h, X)})
        spec = GadgetSpec(SWContext(lat, [1], [H1, LocalHamiltonian(lat, {})]))
        v = validate(spec)
        assert v.is_gadget
        # second-order formula with a single excited level at Delta = 1
        assert op_norm(assemble(v.H_tar) + h @ h) <= 1e-12

    def test_block_diagonal_first_order(self):
        lat = chain(2)
        H1 = LocalHamiltonian(lat, {(0,): Z})
        spec = GadgetSpec(SWContext(lat, [1], [H1, LocalHamiltonian(lat, {(0, 1): np.kron(Z, X)})]))
        assert not validate(spec).is_gadget

    def test_q_max_below_degree(self):
        with pytest.raises(ValueError):
            validate(three_to_two("Z", "Z", "Z"), q_max=2)


class TestCombine:
    def test_single_unchanged(self, rng):
        g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
        c = combine([g])
        for a, b in zip(g.ctx.ladder, c.ctx.ladder):
            np.testing.assert_allclose(assemble(a), assemble(b))

    def test_background_joins_target(self, rng):
        hs = [random_hermitian(rng) for _ in range(3)]
        g = three_to_two(*hs)
        bg = LocalHamiltonian(g.lattice, {(0, 1): 0.3 * np.kron(Z, Z), (2,): 0.2 * X})
        v = validate(combine([g], bg))
        ref = kron3(*hs) + 0.3 * kron3(Z, Z, I2) + 0.2 * kron3(I2, I2, X)
        assert v.is_gadget
        assert op_norm(assemble(v.H_tar) - ref) <= 1e-8

    def test_overlapping_pair(self, rng):
        lat = complete(6)
        specs, ref = [], np.zeros((16, 16), dtype=complex)
        for eff, anc in (((0, 1, 2), 4), ((1, 2, 3), 5)):
            hs = [random_hermitian(rng) for _ in range(3)]
            ladder, tar = three_to_two_ladder(lat, eff, anc, *hs)
            specs.append(GadgetSpec(SWContext(lat, [anc], ladder), tar))
            M = kron3(*hs)
            ref += np.kron(M, I2) if eff[0] == 0 else np.kron(I2, M)
        v = validate(combine(specs), 3)
        assert v.is_gadget
        assert v.target_error <= 1e-8
        assert op_norm(assemble(v.H_tar) - ref) <= 1e-8

    def test_chain_constructor(self):
        g = three_to_two_chain(4, ["Z", "X", "Z"])
        assert g.lattice.n == 6 and g.ctx.anc_sites == (4, 5)
        assert validate(g).target_error <= 1e-8

    def test_ancilla_collision(self):
        g = three_to_two("Z", "Z", "Z")
        with pytest.raises(AncillaCollision):
            combine([g, g])

    def test_separate_lattices(self):
        with pytest.raises(ValueError):
            combine([three_to_two("Z", "Z", "Z"), three_to_two("X", "X", "X")])

    def test_degree_limit(self):
        lat = chain(2)
        ladder = [LocalHamiltonian(lat, {}) for _ in range(4)]
        with pytest.raises(DegreeTooHigh):
            combine([GadgetSpec(SWContext(lat, [1], ladder))])


class TestLocalityFloor:
    @pytest.mark.parametrize("k,kp,d", [(3, 2, 2), (2, 2, 1), (7, 3, 3), (1, 2, 0)])
    def test_values(self, k, kp, d):
        assert locality_floor(k, kp) == d

    def test_invalid(self):
        with pytest.raises(InvalidArity):
            locality_floor(3, 1)


class TestSimulator:
    def test_x_one(self, rng):
        g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
        ev = simulator_eval(g, 1.0)
        ref = assemble(g.ctx.h0()) + sum(assemble(L) for L in g.ctx.ladder)
        np.testing.assert_allclose(ev.matrix, ref, atol=1e-14)
        assert ev.max_strength == 1.0

    def test_x_star_finite(self):
        g = three_to_two("Z", "Z", "Z")
        ev = simulator_eval(g, g.ctx.x_star)
        assert np.all(np.isfinite(ev.matrix))
        assert ev.max_strength == pytest.approx(g.ctx.x_star ** -3)

    def test_lower_bound(self, rng):
        g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
        x = 0.5 * g.ctx.x_star
        ev = simulator_eval(g, x)
        pert = sum(assemble(g.ctx.ladder[a - 1]) * x ** (a - 3) for a in (1, 2, 3))
        assert np.linalg.eigvalsh(ev.matrix)[0] >= -op_norm(pert) * (1 + 1e-6)

    def test_non_positive(self):
        with pytest.raises(NonPositiveX):
            simulator_eval(three_to_two("Z", "Z", "Z"), 0.0)


class TestSerialization:
    def test_roundtrip(self, rng):
        g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
        back = spec_from_json(spec_to_json(g))
        assert back.ctx.anc_sites == g.ctx.anc_sites
        for a, b in zip(g.ctx.ladder, back.ctx.ladder):
            np.testing.assert_allclose(assemble(a), assemble(b), atol=1e-15)
        np.testing.assert_allclose(assemble(back.target), assemble(g.target), atol=1e-15)

    def test_named_constructor_extended(self):
        g = spec_from_json({"constructor": "three_to_two", "h": ["Z", "X", "Z"]}, bits=256)
        assert g.ctx.extended
        assert op_norm(to_double(assemble(g.ctx.ladder[0]))) > 0

    def test_degree_mismatch(self, rng):
        data = spec_to_json(three_to_two("Z", "Z", "Z"))
        data["degree"] = 2
        with pytest.raises(ValueError):
            spec_from_json(data)
