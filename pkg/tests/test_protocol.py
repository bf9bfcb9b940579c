import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridqc import noise as nm
from hybridqc import protocol as pr
from hybridqc import quantum as qc
from hybridqc.errors import EmptyBatch, InvalidArgument, NoSignal
from hybridqc.sampling import substream

IDEAL_NOISE = nm.NoiseSpec(0.0, 0.0, 1.0)
NO_DARK = nm.DetectorSpec(0.0)


def cfg(p=0.01, q=0.0, v=1.0, dark=0.03, eff=1.0, n=10_000, m=4):
    return pr.SessionConfig(pr.PhaseAlphabet(m), n, nm.NoiseSpec(p, q, v), nm.DetectorSpec(dark, eff))


def wrap(x):
    return (x + math.pi) % (2 * math.pi) - math.pi


class TestAlphabet:
    @pytest.mark.parametrize("m", [2, 3, 4, 8, 16])
    def test_phases(self, m):
        ph = pr.PhaseAlphabet(m).phases
        assert np.all(np.diff(ph) > 0)
        assert ph[0] == 0.0 and ph[-1] < 2 * math.pi
        np.testing.assert_allclose(np.diff(ph), 2 * math.pi / m)

    @pytest.mark.parametrize("bad", [0, 1, 2.5])
    def test_invalid_size(self, bad):
        with pytest.raises(InvalidArgument):
            pr.PhaseAlphabet(bad)

    @pytest.mark.parametrize("n", [0, 1, 3, 9999])
    def test_pairs_must_be_even(self, n):
        with pytest.raises(InvalidArgument):
            cfg(n=n)


class TestEncodeDecode:
    def test_examples(self):
        assert pr.encode_symbol(0, pr.PhaseAlphabet(4)) == 0.0
        assert pr.encode_symbol(1, pr.PhaseAlphabet(4)) == pytest.approx(math.pi / 2)
        assert pr.encode_symbol(3, pr.PhaseAlphabet(8)) == pytest.approx(3 * math.pi / 4)

    @pytest.mark.parametrize("k", [-1, 4])
    def test_out_of_range(self, k):
        with pytest.raises(InvalidArgument):
            pr.encode_symbol(k, pr.PhaseAlphabet(4))

    def test_decode_examples(self):
        a = pr.PhaseAlphabet(4)
        assert pr.decode_symbol(0.1, a) == 0
        assert pr.decode_symbol(math.pi / 4, a) == 0
        assert pr.decode_symbol(5.9, a) == 0

    @pytest.mark.parametrize("m", [2, 4, 8, 16])
    def test_round_trip(self, m):
        a = pr.PhaseAlphabet(m)
        assert all(pr.decode_symbol(pr.encode_symbol(k, a), a) == k for k in range(m))

    @given(st.floats(-50, 50), st.floats(-50, 50))
    def test_circular_distance_range(self, x, y):
        d = pr.circular_distance(x, y)
        assert 0.0 <= d <= math.pi + 1e-12
        assert d == pytest.approx(pr.circular_distance(y, x), abs=1e-9)


class TestTransmit:
    def test_ideal_is_pure(self):
        c = pr.SessionConfig(noise=IDEAL_NOISE)
        np.testing.assert_allclose(pr.transmit(0.7, c).matrix, qc.phase_state(0.7).density().matrix, atol=1e-15)

    @pytest.mark.parametrize("phi", [0.0, math.pi / 2, 3.0])
    def test_default_fidelity(self, phi):
        assert pr.transmission_fidelity(phi, cfg()) == pytest.approx(1 - 0.75 * 0.01, abs=1e-9)

    def test_dephased_negativity_formula(self):
        # (1-p)(1-2q) - p/2 for dephasing on A then depolarizing on B
        for p, q in [(0.01, 0.0631), (0.05, 0.1), (0.0, 0.2)]:
            n = qc.negativity(pr.transmit(0.0, cfg(p=p, q=q)))
            assert n == pytest.approx((1 - p) * (1 - 2 * q) - p / 2, abs=1e-12)

    def test_fidelity_monotone_in_p(self):
        message = [0, 1, 2, 3]
        fids = [pr.run_session(message, cfg(p=p, n=100), seed=3).mean_state_fidelity
                for p in (0.0, 0.01, 0.05, 0.2)]
        assert all(a >= b for a, b in zip(fids, fids[1:]))


class TestBobMeasureBatch:
    N = 20_000

    def _band(self):
        return 3 / math.sqrt(self.N / 2)

    def test_phi_zero(self):
        c = pr.bob_measure_batch(qc.phase_state(0.0).density(), self.N, NO_DARK, substream(1, 0))
        assert abs(c.e_xx - 1) <= self._band()
        assert abs(c.e_xy) <= self._band()
        assert c.n_xx == c.n_xy == self.N // 2

    def test_phi_half_pi(self):
        c = pr.bob_measure_batch(qc.phase_state(math.pi / 2).density(), self.N, NO_DARK, substream(1, 1))
        assert abs(c.e_xx) <= self._band()
        assert abs(c.e_xy - 1) <= self._band()

    def test_dark_count_shrink(self):
        c = pr.bob_measure_batch(qc.phase_state(0.0).density(), self.N, nm.DetectorSpec(0.03), substream(1, 2))
        assert abs(c.e_xx - 0.9409) <= 3 * math.sqrt((1 - 0.9409 ** 2) / (self.N / 2))

    def test_correlators_bounded(self):
        c = pr.bob_measure_batch(pr.transmit(1.0, cfg()), 1000, nm.DetectorSpec(0.03), substream(1, 3))
        assert abs(c.e_xx) <= 1 and abs(c.e_xy) <= 1 and c.n_xx >= 1 and c.n_xy >= 1

    def test_empty_batch(self):
        with pytest.raises(EmptyBatch):
            pr.bob_measure_batch(qc.phase_state(0.0).density(), 100, nm.DetectorSpec(0.0, 0.0), substream(1, 4))

    def test_odd_count(self):
        with pytest.raises(InvalidArgument):
            pr.bob_measure_batch(qc.phase_state(0.0).density(), 101, NO_DARK, substream(1, 5))

    def test_frame_shift_does_not_move_estimate(self):
        rho = pr.transmit(2.2, cfg())
        det = nm.DetectorSpec(0.03)
        base = [pr.estimate_phase(pr.bob_measure_batch(rho, 10_000, det, substream(8, i))) for i in range(40)]
        shifted = [pr.estimate_phase(pr.bob_measure_batch(rho, 10_000, det, substream(9, i), frame=math.pi / 3))
                   for i in range(40)]
        diff = wrap(np.mean(shifted) - np.mean(base))
        # each estimate has sd ~ sqrt(2/N)/0.93 ~ 0.015; the mean of 40 ~ 0.0024
        assert abs(diff) <= 3 * math.sqrt(2) * 0.0025
        assert abs(wrap(np.mean(base) - 2.2)) <= 0.01


class TestEstimatePhase:
    @pytest.mark.parametrize("xx,xy,expected", [(1, 0, 0.0), (0, 1, math.pi / 2), (-0.47, -0.47, 5 * math.pi / 4)])
    def test_examples(self, xx, xy, expected):
        assert pr.estimate_phase(pr.Correlators(xx, xy, 1, 1)) == pytest.approx(expected, abs=1e-12)

    def test_no_signal(self):
        with pytest.raises(NoSignal):
            pr.estimate_phase(pr.Correlators(1e-10, -1e-10, 10, 10))

    @given(st.floats(-1, 1), st.floats(-1, 1), st.integers(-20, 20))
    def test_power_of_two_scale_is_exact(self, x, y, e):
        if abs(x) < 1e-6 and abs(y) < 1e-6:
            return
        k = 2.0 ** e
        assert pr.estimate_phase(pr.Correlators(k * x, k * y, 1, 1)) == pr.estimate_phase(pr.Correlators(x, y, 1, 1))

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(1e-3, 1e3))
    def test_scale_invariant(self, x, y, k):
        if abs(x) < 1e-6 and abs(y) < 1e-6:
            return
        a = pr.estimate_phase(pr.Correlators(k * x, k * y, 1, 1))
        b = pr.estimate_phase(pr.Correlators(x, y, 1, 1))
        assert abs(wrap(a - b)) <= 1e-12

    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 10))
    def test_range(self, x, y, ref):
        if abs(x) < 1e-9 and abs(y) < 1e-9:
            return
        assert 0.0 <= pr.estimate_phase(pr.Correlators(x, y, 1, 1, ref)) < 2 * math.pi

    def test_consistency_grid(self):
        n = 100_000
        bound = 5 * math.sqrt(2 / n)
        for j in range(16):
            phi = 2 * math.pi * j / 16
            rho = qc.phase_state(phi).density()
            hits = sum(abs(wrap(pr.estimate_phase(pr.bob_measure_batch(rho, n, NO_DARK, substream(100 + j, r))) - phi))
                       <= bound for r in range(100))
            assert hits >= 99, (j, hits)


class TestCoherenceGate:
    def test_strong_signal(self):
        assert pr.coherence_detected(pr.Correlators(0.9, 0.1, 5000, 5000))

    def test_noise_rejected(self):
        assert not pr.coherence_detected(pr.Correlators(0.01, -0.01, 5000, 5000))

    def test_false_alarm_rate(self):
        # Pure noise correlators should almost never pass.
        rho = qc.DensityMatrix.maximally_mixed(4)
        passed = sum(pr.coherence_detected(pr.bob_measure_batch(rho, 2000, NO_DARK, substream(4, i)))
                     for i in range(300))
        assert passed == 0


class TestRunSession:
    def test_noiseless_symbol_accuracy(self):
        c = pr.SessionConfig(pr.PhaseAlphabet(4), 1000, IDEAL_NOISE, NO_DARK)
        res = pr.run_session([0, 1, 2, 3, 3, 2, 1, 0] * 4, c, seed=1)
        assert res.symbol_accuracy == 1.0

    def test_default_accuracy(self):
        res = pr.run_session(list(range(4)) * 50, cfg(), seed=2)
        assert res.accuracy_at(math.pi / 16) >= 0.99
        assert all(0 <= v <= 1 for v in res.accuracies.values())
        assert all(0 <= r.circular_error <= math.pi for r in res.records)

    def test_zero_visibility_flags_everything(self):
        res = pr.run_session([0, 1, 2, 3] * 5, cfg(v=0.0, n=2000), seed=3)
        assert all(r.flag == "no-signal" for r in res.records)
        assert res.accuracy_at(math.pi) == 0.0

    def test_empty_batches_flagged(self):
        res = pr.run_session([0, 1], cfg(eff=0.0, n=100), seed=4)
        assert all(r.flag == "empty-batch" for r in res.records)

    def test_empty_message(self):
        with pytest.raises(InvalidArgument):
            pr.run_session([], cfg(), seed=1)

    def test_deterministic(self):
        msg = [3, 1, 2]
        a = pr.run_session(msg, cfg(n=1000), seed=77)
        b = pr.run_session(msg, cfg(n=1000), seed=77)
        assert a.records == b.records

    def test_order_independent_substreams(self):
        # Symbol i depends only on (seed, i), so any prefix matches the full run.
        full = pr.run_session([0, 1, 2, 3], cfg(n=1000), seed=5).records
        part = pr.run_session([0, 1], cfg(n=1000), seed=5).records
        assert full[:2] == part
