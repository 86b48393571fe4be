import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasecode.detection import BeamState, sample_shot_noise, simulate_detection
from phasecode.encoding import PhaseSymbol, Transform
from phasecode.errors import UnresolvableError, ValidationError
from phasecode.noise import (
    Regime,
    classify,
    delta_theta_min,
    homodyne_levels,
    l_max,
    levels_from_delta,
    photons_per_window,
    report,
    snr,
    snr_homodyne,
    sweep_rows,
    write_sweep_csv,
)

HALF_PI = 0.5 * math.pi


class TestSnr:
    def test_unit_coherent(self):
        assert snr(BeamState(1.0), BeamState(1.0), HALF_PI) == pytest.approx(2.0)

    def test_in_phase_is_zero(self):
        assert snr(BeamState(3.0), BeamState(2.0), 0.0) == 0.0

    @pytest.mark.parametrize("offset", [0.3, HALF_PI, 2.0])
    def test_strong_reference_is_homodyne(self, offset):
        alpha = 2.0
        strong = snr(BeamState(alpha), BeamState(1e3 * alpha), offset)
        assert strong == pytest.approx(4 * alpha**2 * math.sin(offset) ** 2, rel=5e-3)
        assert strong == pytest.approx(snr_homodyne(BeamState(alpha), offset), rel=5e-3)

    def test_squeezed_homodyne_limit(self):
        beam3 = BeamState.squeezed(2.0, -6.0)
        strong = snr(beam3, BeamState(2e3), HALF_PI)
        assert strong == pytest.approx(snr_homodyne(beam3, HALF_PI), rel=5e-3)

    def test_zero_noise_rejected(self):
        with pytest.raises(ValidationError):
            snr(BeamState(0.0), BeamState(0.0), HALF_PI)

    @pytest.mark.parametrize("t", list(Transform))
    @pytest.mark.parametrize(
        "b3, b2",
        [
            (BeamState(1.0), BeamState(2.0)),
            (BeamState.squeezed(3.0, -5.0), BeamState(2.0)),
            (BeamState.squeezed(3.0, -5.0), BeamState.squeezed(1.5, -2.0)),
            (BeamState(2.0, var_plus=2.0, var_minus=3.0), BeamState.squeezed(1.0, 4.0)),
        ],
    )
    @pytest.mark.parametrize("theta, phi", [(0.2, 1.5), (1.0, 0.1), (2.5, 2.0)])
    def test_matches_detection_signal_over_noise(self, t, b3, b2, theta, phi):
        sym = PhaseSymbol(t, theta)
        ref = BeamState(b2.amplitude, phi, b2.var_plus, b2.var_minus)
        r = simulate_detection(sym, b3, ref)
        signal = r.combo_c if t.flipped else r.combo_d
        assert snr(b3, b2, phi - theta) == pytest.approx(signal**2 / r.noise_var_d, rel=1e-9, abs=1e-12)

    @settings(max_examples=50)
    @given(
        alpha=st.floats(0.1, 20),
        beta=st.floats(0.1, 20),
        offset=st.floats(0.05, math.pi - 0.05),
        v=st.floats(0.05, 1.0),
        shrink=st.floats(0.1, 0.99),
        which=st.sampled_from([0, 1]),
    )
    def test_less_measured_noise_raises_snr(self, alpha, beta, offset, v, shrink, which):
        psi = offset + HALF_PI
        amp = (alpha, beta)[which]
        lo = BeamState(amp, var_plus=v * shrink, var_minus=1 / (v * shrink))
        hi = BeamState(amp, var_plus=v, var_minus=1 / v)
        other = BeamState((beta, alpha)[which])
        pair = (lambda b: (b, other)) if which == 0 else (lambda b: (other, b))
        d_lo, d_hi = lo.quadrature_variance(psi), hi.quadrature_variance(psi)
        r_lo, r_hi = snr(*pair(lo), offset), snr(*pair(hi), offset)
        if d_lo < d_hi * (1 - 1e-9):
            assert r_lo > r_hi
        elif d_lo > d_hi * (1 + 1e-9):
            assert r_lo < r_hi

    def test_squeezing_beats_coherent(self):
        coh = snr(BeamState(3.0), BeamState(3.0), HALF_PI)
        sqz = snr(BeamState.squeezed(3.0, -3.0), BeamState.squeezed(3.0, -3.0), HALF_PI)
        assert sqz > coh


class TestDeltaThetaMin:
    def test_ten_photon_amplitudes(self):
        assert delta_theta_min(BeamState(10.0), BeamState(10.0)) == pytest.approx(
            math.asin(1 / (10 * math.sqrt(2))), rel=1e-12
        )
        assert delta_theta_min(BeamState(10.0), BeamState(10.0)) == pytest.approx(0.07077, abs=1e-5)

    def test_unit_amplitudes(self):
        assert delta_theta_min(BeamState(1.0), BeamState(1.0)) == pytest.approx(math.pi / 4)

    def test_noiseless_limit(self):
        # pure states cannot reach V = 0; the limit is approached by ever stronger squeezing
        values = [delta_theta_min(BeamState.squeezed(1.0, -db), BeamState.squeezed(1.0, -db)) for db in (20, 40, 60)]
        assert values[0] > values[1] > values[2] and values[2] < 1e-3

    def test_snr_is_one_at_the_step(self):
        b3, b2 = BeamState(4.0), BeamState(7.0)
        assert snr(b3, b2, delta_theta_min(b3, b2)) == pytest.approx(1.0, rel=1e-12)

    def test_unresolvable(self):
        with pytest.raises(UnresolvableError):
            delta_theta_min(BeamState(0.5), BeamState(0.5))

    def test_unresolvable_is_not_a_validation_error(self):
        with pytest.raises(UnresolvableError) as info:
            delta_theta_min(BeamState(0.0), BeamState(1.0))
        assert not isinstance(info.value, ValidationError)


class TestLevels:
    def test_hundred_photon_example(self):
        assert l_max(BeamState(10.0), BeamState(10.0)) == pytest.approx(177.6, abs=0.1)

    def test_transverse_alphabet_only(self):
        assert levels_from_delta(math.pi) == pytest.approx(4.0)

    @settings(max_examples=50)
    @given(alpha=st.floats(1, 100), beta=st.floats(1, 100))
    def test_product_is_four_pi(self, alpha, beta):
        r = report(BeamState(alpha), BeamState(beta))
        assert r.l_max * r.delta_theta_min == pytest.approx(4 * math.pi, rel=1e-15)

    def test_milliwatt_example(self):
        n = photons_per_window(1e-3, 1e-6, 1e-6)
        assert n == pytest.approx(5.034e9, rel=1e-3)
        r = homodyne_levels(1e-3, 1e-6, 1e-6)
        assert r.regime is Regime.HOMODYNE_LIMIT
        assert r.delta_theta_min == pytest.approx(1 / (2 * math.sqrt(n)), rel=1e-6)
        assert r.log2_l_max == pytest.approx(20.0, abs=1.0)


@pytest.mark.parametrize(
    "b3, b2, regime",
    [
        (BeamState(1.0), BeamState(1.0), Regime.COHERENT),
        (BeamState.squeezed(1.0, -3.0), BeamState(1.0), Regime.ONE_SQUEEZED),
        (BeamState(1.0), BeamState.squeezed(1.0, -3.0), Regime.ONE_SQUEEZED),
        (BeamState.squeezed(1.0, -3.0), BeamState.squeezed(1.0, -1.0), Regime.TWO_SQUEEZED),
        (BeamState(1.0), None, Regime.HOMODYNE_LIMIT),
    ],
)
def test_classify(b3, b2, regime):
    assert classify(b3, b2) is regime


def test_monte_carlo_snr():
    sym = PhaseSymbol(Transform.PLUS_U0, 0.4)
    b3, b2 = BeamState(3.0), BeamState(5.0, 1.4)
    result = simulate_detection(sym, b3, b2)
    sample = sample_shot_noise(result, rng_seed=11, trials=10**6)
    empirical = sample.mean["D"] ** 2 / sample.variance["D"]
    assert empirical == pytest.approx(snr(b3, BeamState(5.0), 1.4 - 0.4), rel=0.03)


def test_sweep_csv(tmp_path):
    rows = sweep_rows([0.5, 10.0], [10.0])
    path = tmp_path / "sweep.csv"
    write_sweep_csv(rows, path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    assert data.dtype.names == (
        "alpha", "beta", "V_a_plus", "V_a_minus", "V_b_plus", "V_b_minus", "snr", "delta_theta_min", "log2_l_max"
    )
    assert math.isnan(data["delta_theta_min"][0])
    assert data["delta_theta_min"][1] == pytest.approx(delta_theta_min(BeamState(10.0), BeamState(10.0)))
