import math

import numpy as np
import pytest

from phasecode.channel import (
    beams_for_spacing_snr,
    channel_sim,
    decoded_bits,
    level_spacing_snr,
    predicted_ser,
)
from phasecode.detection import BeamState
from phasecode.encoding import bits_to_track
from phasecode.errors import ValidationError


def random_track(pits, levels, seed=0):
    width = 2 + int(math.log2(levels))
    bits = np.random.default_rng(seed).integers(0, 2, pits * width).tolist()
    return bits, bits_to_track(bits, levels)


class TestBeams:
    @pytest.mark.parametrize("levels", [2, 8, 32])
    @pytest.mark.parametrize("target", [1.0, 25.0])
    @pytest.mark.parametrize("ratio", [1.0, 3.0])
    def test_spacing_snr_hits_target(self, levels, target, ratio):
        b3, b2 = beams_for_spacing_snr(levels, target, ratio)
        assert level_spacing_snr(b3, b2, levels) == pytest.approx(target, rel=1e-12)
        assert b2.amplitude == pytest.approx(ratio * b3.amplitude)

    def test_predicted_ser_decreases_with_snr(self):
        values = [predicted_ser(*beams_for_spacing_snr(8, s), 8, 16) for s in (0.25, 1.0, 4.0)]
        assert values[0] > values[1] > values[2]

    def test_predicted_ser_without_signal(self):
        assert math.isnan(predicted_ser(BeamState(0.0), BeamState(1.0), 8, 16))


class TestChannel:
    def test_noiseless_is_error_free(self):
        bits, track = random_track(200, 8)
        b3, b2 = beams_for_spacing_snr(8, 1.0)
        report = channel_sim(track, b3, b2, seed=None, noiseless=True)
        assert report.symbol_errors == 0 and report.undecidable == 0
        assert decoded_bits(report, track) == bits

    def test_high_snr_recovers_bits(self):
        bits, track = random_track(500, 8)
        report = channel_sim(track, *beams_for_spacing_snr(8, 25.0), seed=3)
        assert report.symbol_errors == 0 and report.undecidable == 0
        assert decoded_bits(report, track) == bits
        assert report.ser_ci[0] == 0.0 and report.ser_ci[1] < 0.01

    def test_spacing_snr_one_matches_prediction(self):
        _, track = random_track(2000, 8)
        report = channel_sim(track, *beams_for_spacing_snr(8, 1.0), seed=5)
        assert 0.0 < report.ser < 0.5
        # Gaussian error integral; the spread over seeds is about 0.01
        assert report.ser == pytest.approx(report.predicted_ser, abs=0.03)
        assert report.per_symbol_snr == pytest.approx(1.0)

    def test_dark_signal_all_undecidable(self):
        _, track = random_track(50, 4)
        report = channel_sim(track, BeamState(0.0), BeamState(10.0), seed=1)
        assert report.undecidable == 50 and report.decided == 0
        assert math.isnan(report.ser)
        assert decoded_bits(report, track) is None

    def test_seed_reproducible(self):
        _, track = random_track(100, 8)
        beams = beams_for_spacing_snr(8, 1.0)
        a = channel_sim(track, *beams, seed=9)
        b = channel_sim(track, *beams, seed=9)
        c = channel_sim(track, *beams, seed=10)
        assert a == b
        assert a.decoded != c.decoded

    def test_seed_required_for_noise(self):
        _, track = random_track(5, 2)
        with pytest.raises(ValidationError, match="seed"):
            channel_sim(track, BeamState(1.0), BeamState(1.0), seed=None)

    def test_scan_must_resolve_levels(self):
        _, track = random_track(5, 16)
        with pytest.raises(ValidationError, match="phi_steps"):
            channel_sim(track, BeamState(1.0), BeamState(1.0), seed=1, phi_steps=16)

    def test_empty_track(self):
        with pytest.raises(ValidationError):
            channel_sim(bits_to_track([], 2), BeamState(1.0), BeamState(1.0), seed=1)

    def test_summary_is_plain(self):
        _, track = random_track(10, 2)
        summary = channel_sim(track, *beams_for_spacing_snr(2, 25.0), seed=1).summary()
        assert "decoded" not in summary and isinstance(summary["ser_ci"], list)
