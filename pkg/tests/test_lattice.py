import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swextrap.errors import UnknownSite
from swextrap.lattice import (FFunction, ball, chain, complete, custom, f_constants, from_config, grid,
                              normalize, ring)

F_G = FFunction("exp", 1, 1.0)


class TestBall:
    def test_radius_zero(self):
        assert ball(chain(5), [2], 0) == {2}

    def test_chain_radius_two(self):
        assert ball(chain(7), [3], 2) == {1, 2, 3, 4, 5}

    def test_diameter_covers(self):
        lat = ring(6)
        assert ball(lat, [0], lat.diameter) == set(range(6))

    def test_unknown_site(self):
        with pytest.raises(UnknownSite):
            ball(chain(3), [5], 1)

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([chain(6), ring(7), grid(2, 3), grid(3, 3)]), st.data())
    def test_monotone_and_growth(self, lat, data):
        i = data.draw(st.sampled_from(lat.sites))
        sizes = [len(ball(lat, [i], r)) for r in range(int(lat.diameter) + 2)]
        assert all(a <= b for a, b in zip(sizes, sizes[1:]))
        kD = lat.k_D()
        for r in range(1, int(lat.diameter) + 2):
            assert len(ball(lat, [i], r)) <= kD * r ** lat.dim_D * (1 + 1e-12)


class TestFConstants:
    def test_single_site(self):
        lat = chain(1)
        normF, C_F = f_constants(F_G, lat)
        assert normF == pytest.approx(F_G(0))
        assert C_F == pytest.approx(F_G(0))

    def test_two_sites(self):
        normF, _ = f_constants(F_G, chain(2))
        assert normF == pytest.approx(F_G(0) + F_G(1))

    def test_chain_16_exhaustive(self):
        lat = chain(16)
        n = lat.n
        normF = max(sum(F_G(abs(i - j)) for j in range(n)) for i in range(n))
        C_F = max(sum(F_G(abs(i - k)) * F_G(abs(k - j)) for k in range(n)) / F_G(abs(i - j))
                  for i in range(n) for j in range(n))
        got = f_constants(F_G, lat)
        assert got[0] == pytest.approx(normF, rel=1e-12)
        assert got[1] == pytest.approx(C_F, rel=1e-12)

    def test_normalize_chain_8(self):
        lat = chain(8)
        G = normalize(F_G, lat)
        assert f_constants(G, lat)[1] == pytest.approx(1, abs=1e-12)
        again = normalize(G, lat)
        assert again.prefactor == pytest.approx(G.prefactor, rel=1e-12)

    def test_normalize_scales_by_C_F(self):
        lat = chain(4)
        G = FFunction("power", 1, 1.0, prefactor=4.0 * f_constants(FFunction("power", 1), lat)[1])
        assert f_constants(G, lat)[1] == pytest.approx(4.0 * f_constants(FFunction("power", 1), lat)[1] ** 2)
        assert normalize(G, lat).prefactor == pytest.approx(1 / f_constants(FFunction("power", 1), lat)[1])

    @pytest.mark.parametrize("lat", [chain(5), ring(6), grid(2, 3), complete(4)])
    @pytest.mark.parametrize("F", [F_G, FFunction("power", 1), FFunction("exp", 2, 0.5)])
    def test_C_F_at_least_F0(self, lat, F):
        assert f_constants(F, lat)[1] >= F(0) - 1e-12

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            FFunction("exp", 1, 0.0)


class TestConstructors:
    def test_ring_metric(self):
        lat = ring(6)
        assert lat.dist(0, 5) == 1
        assert lat.diameter == 3

    def test_grid_manhattan(self):
        lat = grid(3, 2)
        assert lat.n == 6 and lat.dim_D == 2
        assert lat.diameter == 3

    def test_from_config(self):
        assert from_config({"chain": 4}).n == 4
        assert from_config({"grid": [2, 2]}).dim_D == 2
        lat = from_config({"custom": [[0, 2], [2, 0]]})
        assert lat.dist(0, 1) == 2
        with pytest.raises(ValueError):
            from_config({"torus": 3})

    def test_custom_metric_symmetric(self):
        M = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
        lat = custom(M)
        for i, j in itertools.product(range(3), repeat=2):
            assert lat.dist(i, j) == lat.dist(j, i)

    def test_sublattice(self):
        lat = chain(5).sublattice([1, 3, 4])
        assert lat.n == 3
        assert lat.dist(0, 1) == 2
        assert not math.isnan(lat.diameter)
