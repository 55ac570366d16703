import numpy as np
import pytest

from oddm_thp.qam import Constellation, demap, energy, map_bits


@pytest.fixture(params=[4, 16, 64])
def constellation(request):
    return Constellation(request.param)


class TestMapping:
    def test_qpsk_convention(self):
        c = Constellation(4)
        assert map_bits([0, 0], c)[0] == 1 + 1j
        assert map_bits([0, 1], c)[0] == 1 - 1j
        assert map_bits([1, 0], c)[0] == -1 + 1j
        assert map_bits([1, 1], c)[0] == -1 - 1j

    def test_16qam_all_zeros(self):
        assert map_bits([0, 0, 0, 0], Constellation(16))[0] == 3 + 3j

    def test_bit_count_checked(self):
        with pytest.raises(ValueError):
            map_bits([0, 1, 0], Constellation(4))

    def test_roundtrip(self, constellation):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, 10**4 * constellation.bits_per_symbol)
        assert np.array_equal(demap(map_bits(bits, constellation), constellation), bits)

    def test_unsupported_order(self):
        with pytest.raises(ValueError):
            Constellation(32)


class TestDemap:
    def test_exact_points(self, constellation):
        pts = constellation.points()
        bits = demap(pts, constellation)
        assert np.array_equal(map_bits(bits, constellation), pts)

    def test_nearest_level_qpsk(self):
        c = Constellation(4)
        got = demap(np.array([0.1 - 2.3j]), c)
        assert np.array_equal(got, demap(np.array([1 - 1j]), c))

    def test_saturating_16qam(self):
        c = Constellation(16)
        got = demap(np.array([10 + 10j]), c)
        assert np.array_equal(got, demap(np.array([3 + 3j]), c))


class TestEnergy:
    @pytest.mark.parametrize("order,expected", [(4, 2.0), (16, 10.0), (64, 42.0)])
    def test_closed_form(self, order, expected):
        assert energy(Constellation(order)) == expected

    def test_empirical_energy(self, constellation):
        rng = np.random.default_rng(4)
        bits = rng.integers(0, 2, 10**5 * constellation.bits_per_symbol)
        syms = map_bits(bits, constellation)
        measured = np.mean(np.abs(syms) ** 2)
        assert measured == pytest.approx(energy(constellation), rel=0.01)


class TestGrayProperty:
    def test_adjacent_levels_differ_in_one_bit(self, constellation):
        c = constellation
        levels = c.axis_levels
        # recover the per-axis bit group of each level via a pure-real symbol
        imag_ref = 1  # fixed imaginary level keeps the imag bits constant
        half = c.bits_per_symbol // 2
        labels = []
        for level in levels:
            bits = demap(np.array([level + 1j * imag_ref]), c)
            labels.append(tuple(bits[:half]))
        for a, b in zip(labels, labels[1:]):
            assert sum(x != y for x, y in zip(a, b)) == 1
