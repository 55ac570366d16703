import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddm_thp.channel import ChannelRealization, PathTap, apply_channel, draw_channel, eva_profile, ProfileSpec
from oddm_thp.core import GridConfig, SeedPlan, TimeSequence, devectorize
from oddm_thp.modem import oddm_modulate
from oddm_thp.qam import Constellation, map_bits
from oddm_thp.thp import (
    ThpConfig,
    mod_k,
    precode,
    run_thp_frame,
    shifted_tap_gains,
    single_tap_equalize,
    thp_decode,
)


def make_channel(taps_spec, grid):
    nt = grid.n_doppler * grid.t_sym
    taps = tuple(PathTap(complex(g), int(l), int(k), k / nt) for g, l, k in taps_spec)
    return ChannelRealization(taps=taps)


def random_channel(rng, grid, n_paths):
    delays = [0] + sorted(rng.choice(np.arange(1, grid.cp_len + 1), n_paths - 1,
                                     replace=False).tolist())
    spec = []
    for l in delays:
        gain = complex(*rng.standard_normal(2)) / np.sqrt(n_paths)
        if l == 0 and abs(gain) < 0.1:
            gain += 0.3
        spec.append((gain, l, int(rng.integers(-2, 3))))
    return make_channel(spec, grid)


class TestModK:
    def test_paper_example(self):
        wrapped, p, q = mod_k(3.5 - 3.8j, 4.0)
        assert wrapped == pytest.approx(-0.5 + 0.2j, abs=1e-12)
        assert (p, q) == (1, -1)

    def test_zero(self):
        wrapped, p, q = mod_k(0.0 + 0.0j, 7.3)
        assert wrapped == 0 and p == 0 and q == 0

    def test_boundary_wraps_down(self):
        wrapped, p, q = mod_k(2.0 + 0j, 4.0)
        assert wrapped == pytest.approx(-2.0 + 0j)
        assert (p, q) == (1, 0)

    def test_positive_modulus_required(self):
        with pytest.raises(ValueError):
            mod_k(1.0 + 0j, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        re=st.floats(-1e3, 1e3, allow_nan=False),
        im=st.floats(-1e3, 1e3, allow_nan=False),
        k=st.floats(0.1, 50.0, allow_nan=False),
    )
    def test_decomposition_identity(self, re, im, k):
        x = complex(re, im)
        wrapped, p, q = mod_k(x, k)
        recon = complex(wrapped) + p * k + 1j * q * k
        assert abs(x - recon) <= 1e-12 * max(1.0, abs(x))
        assert -k / 2 <= wrapped.real < k / 2
        assert -k / 2 <= wrapped.imag < k / 2


class TestPrecode:
    GRID = GridConfig(m_delay=16, n_doppler=8, cp_len=4)

    def test_single_path_reduces_to_modulo(self):
        rng = np.random.default_rng(40)
        ch = make_channel([(1.0 + 0j, 0, 0)], self.GRID)
        cfg = ThpConfig(order=4, alpha=1.0)
        x = TimeSequence(rng.standard_normal(self.GRID.nm) + 1j * rng.standard_normal(self.GRID.nm))
        out, rec = precode(x, ch, cfg, self.GRID)
        wrapped, p, q = mod_k(x.samples, cfg.modulus)
        assert np.abs(out.body - wrapped).max() < 1e-12
        assert np.array_equal(rec.p, p) and np.array_equal(rec.q, q)
        assert np.abs(out.samples[: self.GRID.cp_len]).max() == 0.0

    def test_two_path_hand_example(self):
        grid = GridConfig(m_delay=2, n_doppler=2, cp_len=1)
        # one echo at unit delay, no Doppler anywhere, amplitudes chosen so
        # no wrap fires: the recursion is solvable by hand
        ch = make_channel([(1.0 + 0j, 0, 0), (0.5 + 0j, 1, 0)], grid)
        cfg = ThpConfig(order=4, alpha=1.0)
        x = TimeSequence(np.array([1 + 1j, 1 + 1j, 0, 0], dtype=complex))
        out, rec = precode(x, ch, cfg, grid)
        assert out.body[0] == pytest.approx(1 + 1j)
        assert out.body[1] == pytest.approx(0.5 + 0.5j)
        y = apply_channel(out, ch, grid, 0.0, np.random.default_rng(0))
        assert y.samples[0] == pytest.approx(1 + 1j)
        assert y.samples[1] == pytest.approx(1 + 1j)
        assert rec.wrap_count == 0

    def test_receive_identity_random_three_path(self):
        rng = np.random.default_rng(41)
        cfg = ThpConfig(order=4, alpha=1.0)
        const = Constellation(4)
        for _ in range(30):
            ch = random_channel(rng, self.GRID, 3)
            bits = rng.integers(0, 2, self.GRID.nm * 2)
            frame = devectorize(map_bits(bits, const), 16, 8)
            x_t = oddm_modulate(frame, self.GRID)
            x_thp, rec = precode(x_t, ch, cfg, self.GRID)
            y = apply_channel(x_thp, ch, self.GRID, 0.0, rng)
            h1_t = shifted_tap_gains(ch, self.GRID)[0]
            k = cfg.modulus
            resid = y.samples - h1_t * x_t.samples + h1_t * (rec.p * k + 1j * rec.q * k)
            assert np.abs(resid).max() < 1e-9

    def test_output_bounded(self):
        rng = np.random.default_rng(42)
        ch = random_channel(rng, self.GRID, 3)
        cfg = ThpConfig(order=4, alpha=0.8)
        x = TimeSequence(rng.standard_normal(self.GRID.nm) + 1j * rng.standard_normal(self.GRID.nm))
        out, _ = precode(x, ch, cfg, self.GRID)
        assert out.body.real.max() < cfg.modulus / 2
        assert out.body.real.min() >= -cfg.modulus / 2
        assert out.body.imag.max() < cfg.modulus / 2

    def test_mac_count(self):
        rng = np.random.default_rng(43)
        for n_paths in (1, 2, 3, 4):
            ch = random_channel(rng, self.GRID, n_paths)
            x = TimeSequence(rng.standard_normal(self.GRID.nm) + 0j)
            _, rec = precode(x, ch, ThpConfig(order=4, alpha=1.0), self.GRID)
            assert rec.cancel_macs == self.GRID.nm * (n_paths - 1)

    def test_weak_first_tap_refused(self):
        ch = make_channel([(1e-9 + 0j, 0, 0), (0.5 + 0j, 1, 0)], self.GRID)
        x = TimeSequence(np.zeros(self.GRID.nm, dtype=complex))
        with pytest.raises(ValueError):
            precode(x, ch, ThpConfig(order=4, alpha=1.0), self.GRID)


class TestKernelParity:
    def test_compiled_matches_python(self):
        from oddm_thp import _precode_py
        from oddm_thp import kernels

        if kernels.BACKEND != "compiled":
            pytest.skip("compiled kernel not built")
        rng = np.random.default_rng(44)
        grid = GridConfig(m_delay=16, n_doppler=8, cp_len=4)
        # contractive echoes: sample-by-sample comparison is meaningful only
        # when the recursion does not amplify last-ulp arithmetic differences
        ch = make_channel([(1.0 + 0j, 0, 1), (0.25 + 0.1j, 1, -1),
                           (0.1 - 0.15j, 3, 2), (0.05 + 0.05j, 4, 0)], grid)
        x = rng.standard_normal(grid.nm) + 1j * rng.standard_normal(grid.nm)
        h_shift = shifted_tap_gains(ch, grid)
        delays = np.asarray([t.delay_idx for t in ch.taps], dtype=np.int64)
        a = kernels.precode_kernel(x, h_shift, delays, grid.cp_len, 4.0)
        b = _precode_py.precode_kernel(x, h_shift, delays, grid.cp_len, 4.0)
        assert np.abs(a[0] - b[0]).max() < 1e-12
        assert np.array_equal(a[1], b[1])
        assert np.array_equal(a[2], b[2])
        assert a[3] == b[3]


class TestDecode:
    GRID = GridConfig(m_delay=16, n_doppler=8, cp_len=4)

    def test_noiseless_single_path_no_wraps(self):
        rng = np.random.default_rng(45)
        cfg = ThpConfig(order=4, alpha=10.0)  # huge modulus: nothing wraps
        ch = make_channel([(1.0 + 0j, 0, 0)], self.GRID)
        x = TimeSequence(rng.standard_normal(self.GRID.nm) + 1j * rng.standard_normal(self.GRID.nm))
        x_thp, rec = precode(x, ch, cfg, self.GRID)
        assert rec.wrap_count == 0
        y = apply_channel(x_thp, ch, self.GRID, 0.0, rng)
        out, _ = thp_decode(y, 1.0 + 0j, 0, cfg, self.GRID)
        assert np.abs(out.samples - x.samples).max() < 1e-12

    def test_phase_invariance(self):
        rng = np.random.default_rng(46)
        cfg = ThpConfig(order=4, alpha=10.0)
        x = TimeSequence(rng.standard_normal(self.GRID.nm) + 1j * rng.standard_normal(self.GRID.nm))
        outputs = []
        for phi in (0.0, 0.7, 2.1, -1.3):
            h1 = np.exp(1j * phi)
            ch = make_channel([(h1, 0, 0)], self.GRID)
            x_thp, _ = precode(x, ch, cfg, self.GRID)
            y = apply_channel(x_thp, ch, self.GRID, 0.0, rng)
            out, _ = thp_decode(y, h1, 0, cfg, self.GRID)
            outputs.append(out.samples)
        for other in outputs[1:]:
            assert np.abs(other - outputs[0]).max() < 1e-12

    def test_wrap_structure_with_tx_wraps(self):
        rng = np.random.default_rng(47)
        cfg = ThpConfig(order=4, alpha=0.7, collect_diagnostics=True)
        h1 = 1.4 - 0.6j
        ch = make_channel([(h1, 0, 1), (0.4 + 0.2j, 2, -1)], self.GRID)
        const = Constellation(4)
        bits = rng.integers(0, 2, self.GRID.nm * 2)
        frame = devectorize(map_bits(bits, const), 16, 8)
        x_t = oddm_modulate(frame, self.GRID)
        x_thp, tx_rec = precode(x_t, ch, cfg, self.GRID)
        assert tx_rec.wrap_count > 0
        y = apply_channel(x_thp, ch, self.GRID, 0.0, rng)
        out, rec = thp_decode(y, h1, 1, cfg, self.GRID, tx_record=tx_rec)
        k_r = abs(h1) * cfg.modulus
        # output = |h_1| x_T + I_T with I_T components on the K_r lattice
        i_t = out.samples - abs(h1) * x_t.samples
        assert np.abs(i_t - rec.i_t).max() < 1e-9
        lattice = rec.i_t / k_r
        assert np.abs(lattice.real - np.round(lattice.real)).max() < 1e-9
        assert np.abs(lattice.imag - np.round(lattice.imag)).max() < 1e-9

    def test_zero_gain_rejected(self):
        y = TimeSequence(np.zeros(self.GRID.nm, dtype=complex))
        with pytest.raises(ValueError):
            thp_decode(y, 0.0, 0, ThpConfig(order=4, alpha=1.0), self.GRID)


class TestSingleTapEqualize:
    def test_unity(self):
        y = np.ones((4, 4), dtype=complex)
        assert np.array_equal(single_tap_equalize(y, 1.0), y)

    def test_scaling(self):
        y = np.full((2, 2), 2 + 2j)
        assert np.allclose(single_tap_equalize(y, 2.0), np.full((2, 2), 1 + 1j))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            single_tap_equalize(np.ones((2, 2)), 0.0)


class TestRunThpFrame:
    def test_noiseless_single_path_exact(self):
        grid = GridConfig(m_delay=8, n_doppler=8, cp_len=2)
        rng = np.random.default_rng(48)
        ch = make_channel([(1.0 + 0j, 0, 0)], grid)
        bits = rng.integers(0, 2, grid.nm * 2)
        tx, rx, diag = run_thp_frame(bits, ch, ThpConfig(order=4, alpha=3.0), grid, 0.0, rng)
        assert np.array_equal(tx, rx)

    def test_noiseless_multipath_errors_only_at_interference(self):
        grid = GridConfig(m_delay=16, n_doppler=8, cp_len=4)
        rng = np.random.default_rng(49)
        cfg = ThpConfig(order=4, alpha=3.0, collect_diagnostics=True)
        clean_frames = 0
        for _ in range(20):
            ch = random_channel(rng, grid, 3)
            bits = rng.integers(0, 2, grid.nm * 2)
            tx, rx, diag = run_thp_frame(bits, ch, cfg, grid, 0.0, rng)
            errors = (tx != rx).reshape(-1, 2).any(axis=1)  # per-symbol
            i_dd = diag["rx_record"].i_dd
            if diag["rx_record"].wrap_count == 0:
                clean_frames += 1
                assert not errors.any()
            else:
                from oddm_thp.core import vectorize

                interfered = np.abs(vectorize(i_dd)) > 1e-12
                assert np.all(interfered[errors])
        assert clean_frames > 0

    def test_precoded_power_rich_multipath(self):
        # uniform-wrap power model: valid when the echo power dominates the
        # direct tap, here five equal-power taps
        grid = GridConfig(m_delay=32, n_doppler=16, cp_len=6)
        sp = grid.sample_period
        profile = ProfileSpec(tap_delays_s=tuple(i * sp for i in range(5)),
                              tap_powers_db=(0.0,) * 5, fmax_hz=300.0, name="eq5")
        plan = SeedPlan(50)
        cfg = ThpConfig(order=4, alpha=2.0)
        const = Constellation(4)
        powers = []
        for f in range(100):
            rng = plan.stream(f, "power")
            ch = draw_channel(profile, grid, rng)
            bits = rng.integers(0, 2, grid.nm * 2)
            _, _, diag = run_thp_frame(bits, ch, cfg, grid, 0.0, rng)
            powers.append(diag["precoded_power"])
        assert np.mean(powers) == pytest.approx(cfg.precoded_power, rel=0.05)

    def test_wrap_rate_decreases_with_alpha_single_path(self):
        grid = GridConfig(m_delay=32, n_doppler=8, cp_len=2)
        plan = SeedPlan(51)
        ch = make_channel([(1.0 + 0j, 0, 0)], grid)
        rates = []
        for alpha in (0.5, 0.8, 1.1, 1.4, 1.7):
            cfg = ThpConfig(order=4, alpha=alpha)
            rate = 0.0
            for f in range(40):
                rng = plan.stream(f, "wrap")
                bits = rng.integers(0, 2, grid.nm * 2)
                _, _, diag = run_thp_frame(bits, ch, cfg, grid, 0.0, rng)
                rate += diag["tx_wrap_rate"] / 40
            rates.append(rate)
        assert all(a > b for a, b in zip(rates, rates[1:]))


class TestThpConfig:
    def test_modulus(self):
        cfg = ThpConfig(order=16, alpha=1.5)
        assert cfg.modulus == pytest.approx(2 * 1.5 * 4.0, rel=1e-12)

    def test_positive_alpha(self):
        with pytest.raises(ValueError):
            ThpConfig(order=4, alpha=0.0)
