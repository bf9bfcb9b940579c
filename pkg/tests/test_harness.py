import math

import numpy as np
import pytest

from hybridqc import harness as hs
from hybridqc import protocol as pr
from hybridqc import quantum as qc
from hybridqc.adversary import AttackStrategy
from hybridqc.errors import ConfigError, InvalidArgument
from hybridqc.sampling import substream
from hybridqc.scenario import preset


def small(name="default-5.1", **kw):
    base = dict(trials=60, pairs_per_symbol=2000, master_seed=42)
    base.update(kw)
    return preset(name, **base)


class TestWindowedSigma:
    def test_constant(self):
        mean, sigma = hs.windowed_sigma([0.7] * 100, 50)
        assert mean == pytest.approx(0.7) and sigma == 0.0

    def test_blocks_of_two(self):
        # Pairs (0,1),(2,3),... have means 0.5, 2.5, ...; spacing 2 over 50 blocks.
        values = np.arange(100, dtype=float)
        mean, sigma = hs.windowed_sigma(values, 50)
        assert mean == pytest.approx(49.5)
        assert sigma == pytest.approx(np.std(np.arange(50) * 2 + 0.5, ddof=1))

    def test_remainder_goes_to_last_block(self):
        values = [0, 0, 0, 0, 1, 1, 1]  # blocks: [0,0], [0,0], [1,1,1]
        _, sigma = hs.windowed_sigma(values, 3)
        assert sigma == pytest.approx(np.std([0, 0, 1], ddof=1))

    def test_coin_flips(self):
        rng = np.random.default_rng(0)
        p = 0.3
        flips = (rng.random(10_000) < p).astype(float)
        _, sigma = hs.windowed_sigma(flips, 50)
        ref = math.sqrt(p * (1 - p) / 200)
        assert ref / 3 <= sigma <= 3 * ref

    def test_too_few_records(self):
        with pytest.raises(InvalidArgument):
            hs.windowed_sigma([1.0, 2.0], 3)

    def test_single_window_undefined(self):
        assert hs.windowed_sigma([1.0, 2.0], 1)[1] is None


class TestRunScenario:
    def test_requires_seed(self):
        with pytest.raises(ConfigError):
            hs.run_scenario(preset("default-5.1", trials=2))

    def test_bad_workers(self):
        with pytest.raises(InvalidArgument):
            hs.run_scenario(small(), workers=0)

    def test_default_bob(self):
        rep = hs.run_scenario(small(trials=200, pairs_per_symbol=10_000))
        bob = rep.role("Bob")
        assert bob.fidelity == pytest.approx(0.9925, abs=0.002)
        assert bob.accuracy_at(math.pi / 16)[0] >= 0.99
        assert rep.negativity == pytest.approx(0.985, abs=1e-9)
        assert all(s is None or s >= 0 for s in (bob.fid_sigma, bob.vis_sigma))

    @pytest.mark.parametrize("attack", ["PassiveTap", "UniversalClone", "InterceptResend"])
    def test_roles_present(self, attack):
        rep = hs.run_scenario(small(attack=attack))
        names = [r.role for r in rep.roles]
        assert names == ["Bob", AttackStrategy(attack, "RandomEquatorial" if attack == "InterceptResend"
                                               else None).eve_role]
        for r in rep.records:
            assert r.flags or 0 <= r.circular_error <= math.pi

    def test_determinism_across_workers(self):
        cfg = small(attack="UniversalClone", trials=50)
        texts = {hs.format_report(hs.run_scenario(cfg, workers=w)) for w in (1, 4, 16)}
        texts.add(hs.format_report(hs.run_scenario(cfg, workers=1)))
        assert len(texts) == 1

    def test_numba_and_numpy_reports_identical(self):
        from hybridqc import _kernels
        if not _kernels.HAS_NUMBA:
            pytest.skip("numba not installed")
        cfg = small(attack="InterceptResend", trials=20)
        a = hs.format_report(hs.run_scenario(cfg, backend="numba"))
        b = hs.format_report(hs.run_scenario(cfg, backend="numpy"))
        assert a == b

    def test_single_trial(self):
        rep = hs.run_scenario(small(trials=1))
        bob = rep.role("Bob")
        rec = rep.records[0]
        assert bob.fid_sigma is None and bob.vis_sigma is None
        assert all(s is None for _, _, s in bob.accuracy)
        assert bob.fidelity == rec.state_fidelity
        assert bob.visibility == rec.visibility
        assert bob.accuracy_at(math.pi / 16)[0] == float(rec.hit(math.pi / 16))

    def test_negativity_is_analytic(self):
        cfg = small("paper-negativity")
        rep = hs.run_scenario(cfg.__class__(**{**cfg.__dict__, "trials": 2}))
        assert rep.negativity == pytest.approx(qc.negativity(pr.transmit(0.0, cfg.session)), abs=1e-9)

    def test_empty_batch_is_flagged(self):
        rep = hs.run_scenario(small(efficiency=0.0, trials=3))
        assert rep.role("Bob").n_flagged == 3
        assert all(r.flags == "empty-batch" for r in rep.records)

    def test_sigma_shrinks_with_trials(self):
        # A window near the estimator's spread keeps accuracy away from 0 and 1.
        sig = []
        for trials in (1000, 10_000):
            cfg = preset("default-5.1", trials=trials, master_seed=7, window_deltas="0.012")
            sig.append(hs.run_scenario(cfg).role("Bob").accuracy[0][2])
        ratio = sig[0] / sig[1]
        assert math.sqrt(10) / 2 <= ratio <= 2 * math.sqrt(10)


class TestChanceCalibration:
    @pytest.mark.parametrize("delta", [0.012 * math.pi, math.pi / 16, math.pi / 4])
    def test_blind_guesser(self, delta):
        n = 20_000
        recs = hs.blind_guesser_records(n, 11, pr.PhaseAlphabet(4))
        acc = np.mean([r.hit(delta) for r in recs])
        p = delta / math.pi
        assert abs(acc - p) <= 3 * math.sqrt(p * (1 - p) / n)


class TestOrdering:
    def test_bob_beats_every_eve(self):
        cfg = small(trials=400, pairs_per_symbol=4000)
        bob_sym = hs.run_scenario(cfg).role("Bob").accuracy_at(math.pi / 4)[0]
        for attack in ("PassiveTap", "UniversalClone", "InterceptResend"):
            rep = hs.run_scenario(small(attack=attack, trials=400, pairs_per_symbol=4000))
            eve = rep.roles[1]
            for w, mean, _ in eve.accuracy:
                assert bob_sym - mean >= 0.9 or w > math.pi / 8
            acc, _ = eve.accuracy_at(0.012 * math.pi)
            assert abs(acc - 0.012) <= 3 * math.sqrt(0.012 * 0.988 / 400)


class TestFringes:
    def test_noiseless(self):
        cfg = preset("noiseless", master_seed=1)
        v = hs.visibility_from_fringes(cfg, 20_000, substream(1, 0))
        assert abs(v - 1.0) <= 2 / math.sqrt(20_000)

    def test_default_visibility(self):
        cfg = preset("default-5.1", master_seed=1, fringe_points=16)
        samples = 200_000
        v = hs.visibility_from_fringes(cfg, samples, substream(1, 1))
        # the extreme grid points have correlator ~ +-0.931, sampling sd ~ sqrt((1-0.931^2)/n)
        assert abs(v - 0.99 * 0.97 ** 2) <= 3 * math.sqrt(1 / samples) + 1e-3

    def test_fixed_z_kills_fringe(self):
        cfg = preset("default-5.1", master_seed=1, attack="InterceptResend", basis_policy="FixedZ")
        assert hs.visibility_from_fringes(cfg, 20_000, substream(1, 2)) <= 0.05

    def test_min_samples(self):
        with pytest.raises(InvalidArgument):
            hs.visibility_from_fringes(preset("default-5.1"), 50, substream(1, 3))

    def test_fringe_shape(self):
        cfg = preset("noiseless", fringe_points=8)
        f = hs.fringe(cfg, 10_000, substream(1, 4))
        assert f.shape == (8,)
        assert np.all((f >= 0) & (f <= 1))
