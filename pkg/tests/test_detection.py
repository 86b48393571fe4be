import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phasecode.detection import (
    BeamState,
    DetectionResult,
    decode,
    noise_variance,
    phi_grid,
    sample_shot_noise,
    scan_rows,
    simulate_detection,
    signal_terms,
)
from phasecode.encoding import PhaseSymbol, Transform
from phasecode.errors import ValidationError
from phasecode.modes import SpatialGrid

HALF_PI = 0.5 * math.pi


def read(symbol, alpha, beta, phi, grid=None, **beam):
    return simulate_detection(symbol, BeamState(alpha, **beam), BeamState(beta, phi), grid)


class TestBeamState:
    def test_uncertainty_bound(self):
        with pytest.raises(ValidationError):
            BeamState(1.0, var_plus=0.5, var_minus=1.5)

    def test_squeezed_is_pure(self):
        b = BeamState.squeezed(2.0, -3.0)
        assert b.is_pure and b.var_plus == pytest.approx(10**-0.3)

    def test_quadrature_interpolation(self):
        b = BeamState(1.0, var_plus=0.5, var_minus=2.0)
        assert b.quadrature_variance(0.0) == pytest.approx(0.5)
        assert b.quadrature_variance(HALF_PI) == pytest.approx(2.0)
        assert b.quadrature_variance(math.pi / 4) == pytest.approx(1.25)

    def test_negative_amplitude(self):
        with pytest.raises(ValidationError):
            BeamState(-1.0)


class TestSignalTerms:
    def test_a_and_b(self):
        r = read(PhaseSymbol(Transform.PLUS_U0, 1.1), 1.0, 1.0, 0.4)
        assert r.combo_a == pytest.approx(0.0, abs=1e-15)
        assert r.combo_b == pytest.approx(2.0)

    def test_plus_u0_on_quadrature(self):
        r = read(PhaseSymbol(Transform.PLUS_U0, 0.0), 1.0, 1.0, HALF_PI)
        assert (r.combo_d, r.combo_c) == (pytest.approx(2.0), pytest.approx(0.0, abs=1e-15))

    def test_minus_uf0_on_quadrature(self):
        r = read(PhaseSymbol(Transform.MINUS_UF0, 0.0), 1.0, 1.0, HALF_PI)
        assert (r.combo_c, r.combo_d) == (pytest.approx(-2.0), pytest.approx(0.0, abs=1e-15))

    @pytest.mark.parametrize("t", list(Transform))
    @pytest.mark.parametrize("theta, phi", [(0.0, 0.0), (0.3, 1.2), (2.9, 0.1), (1.0, 3.0)])
    def test_numeric_matches_closed_form(self, grid, t, theta, phi):
        sym = PhaseSymbol(t, theta)
        alpha, beta = 1.3, 0.7
        numeric = read(sym, alpha, beta, phi, grid).combos()
        expected = signal_terms(sym, alpha, beta, phi)
        for key in "ABCD":
            assert numeric[key] == pytest.approx(expected[key], abs=1e-9), key

    def test_numeric_independent_of_grid(self, grid):
        sym = PhaseSymbol(Transform.PLUS_UF0, 0.8)
        coarse = read(sym, 1.0, 2.0, 0.2, grid)
        fine = read(sym, 1.0, 2.0, 0.2, SpatialGrid(10.0, 8192))
        for a, b in zip(coarse.combos().values(), fine.combos().values()):
            assert a == pytest.approx(b, abs=1e-9)

    @settings(max_examples=50)
    @given(
        t=st.sampled_from(list(Transform)),
        theta=st.floats(0, math.pi, exclude_max=True),
        phi=st.floats(0, 2 * math.pi),
        alpha=st.floats(0, 10),
        beta=st.floats(0, 10),
    )
    def test_power_conserved(self, t, theta, phi, alpha, beta):
        r = read(PhaseSymbol(t, theta), alpha, beta, phi)
        assert r.combo_b == pytest.approx(alpha**2 + beta**2, rel=1e-12, abs=1e-12)
        assert min(r.d1, r.d2, r.d3, r.d4) >= -1e-9 * (1 + alpha**2 + beta**2)


class TestNoiseVariance:
    @pytest.mark.parametrize("psi_phi", [0.0, 0.4, 1.3, 2.8])
    def test_coherent_independent_of_angle(self, psi_phi):
        v = noise_variance(PhaseSymbol(Transform.PLUS_U0, 0.2), BeamState(3.0), BeamState(2.0, psi_phi))
        assert v == pytest.approx(13.0)

    def test_squeezed_signal_alone(self):
        # psi = phi - theta + pi/2 = 0 measures V+ of beam 3; beam 2's noise is weighted by alpha^2 = 0
        beam3 = BeamState(0.0, var_plus=0.5, var_minus=2.0)
        sym = PhaseSymbol(Transform.PLUS_U0, HALF_PI)
        assert noise_variance(sym, beam3, BeamState(3.0, 0.0)) == pytest.approx(0.5 * 9.0)

    def test_unit_beams(self):
        assert noise_variance(PhaseSymbol(Transform.PLUS_U0), BeamState(1.0), BeamState(1.0)) == 2.0

    @pytest.mark.parametrize("combo", ["A", "B", "E"])
    def test_only_c_and_d(self, combo):
        with pytest.raises(ValidationError):
            noise_variance(PhaseSymbol(Transform.PLUS_U0), BeamState(1.0), BeamState(1.0), combo)


class TestMonteCarlo:
    def test_variance_matches_analytic(self):
        r = read(PhaseSymbol(Transform.PLUS_U0, 0.0), 10.0, 10.0, 0.7)
        n = 10**6
        sample = sample_shot_noise(r, rng_seed=2024, trials=n)
        # standard error of a sample variance of Gaussian draws
        se = 200.0 * math.sqrt(2.0 / (n - 1))
        assert abs(sample.variance["D"] - 200.0) < 3 * se
        assert abs(sample.mean["D"] - r.combo_d) < 3 * math.sqrt(200.0 / n)

    def test_noiseless_limit(self):
        eps = 1e-12
        r = DetectionResult(1.0, 0.5, 0.25, 0.25, eps, eps)
        sample = sample_shot_noise(r, 1, 1000)
        assert sample.mean["C"] == pytest.approx(r.combo_c, abs=10 * math.sqrt(eps))
        assert sample.mean["D"] == pytest.approx(r.combo_d, abs=10 * math.sqrt(eps))

    def test_seed_determinism(self):
        r = read(PhaseSymbol(Transform.PLUS_UF0, 0.5), 2.0, 3.0, 0.1)
        assert sample_shot_noise(r, 7, 500) == sample_shot_noise(r, 7, 500)
        assert sample_shot_noise(r, 7, 500) != sample_shot_noise(r, 8, 500)


def scan_of(symbol, alpha=1.0, beta=1.0):
    return lambda phi: read(symbol, alpha, beta, phi)


class TestDecode:
    def test_plus_u0(self):
        steps = 64
        res = decode(scan_of(PhaseSymbol(Transform.PLUS_U0, 0.3)), steps)
        assert res.symbol.transform is Transform.PLUS_U0
        assert abs(res.theta - 0.3) < math.pi / steps
        assert res.combination == "D"

    def test_minus_uf0_at_zero(self):
        res = decode(scan_of(PhaseSymbol(Transform.MINUS_UF0, 0.0)), 64)
        assert res.symbol.transform is Transform.MINUS_UF0
        assert min(res.theta, math.pi - res.theta) < 1e-9
        assert res.combination == "C"

    def test_zero_signal_undecidable(self):
        res = decode(scan_of(PhaseSymbol(Transform.PLUS_U0, 1.0), alpha=0.0), 32)
        assert res.undecidable and res.symbol is None
        assert len(res.candidates) == 2

    @pytest.mark.parametrize("refine", ["parabolic", "fit"])
    @pytest.mark.parametrize("t", list(Transform))
    @pytest.mark.parametrize("theta", [0.05, 0.9, 1.6, 2.4, 3.1])
    def test_all_symbols(self, refine, t, theta):
        steps = 32
        res = decode(scan_rows(PhaseSymbol(t, theta), BeamState(1.5), BeamState(2.0), steps), steps, refine=refine)
        assert res.symbol.transform is t
        tol = math.pi / steps if refine == "parabolic" else 1e-9
        assert abs(res.theta - theta) < tol

    def test_fit_confidence_scales_with_snr(self):
        sym = PhaseSymbol(Transform.PLUS_U0, 1.0)
        rows = scan_rows(sym, BeamState(1.0), BeamState(1.0), 16)
        # amplitude 2 with variance 2 per window; SE of the amplitude is sqrt(2 var / n)
        res = decode(rows, 16, refine="fit")
        assert res.confidence == pytest.approx(2.0 / math.sqrt(2.0 * 2.0 / 16), rel=1e-9)

    def test_min_confidence_threshold(self):
        rows = scan_rows(PhaseSymbol(Transform.PLUS_U0, 1.0), BeamState(1.0), BeamState(1.0), 16)
        # confidence here is exactly 4
        assert not decode(rows, 16, refine="fit", min_confidence=3.9).undecidable
        assert decode(rows, 16, refine="fit", min_confidence=4.1).undecidable

    def test_scan_shape_checked(self):
        with pytest.raises(ValidationError):
            decode(np.zeros((10, 4)), 16)

    def test_too_few_steps(self):
        with pytest.raises(ValidationError):
            decode(np.zeros((4, 4)), 4)

    def test_unknown_refinement(self):
        rows = scan_rows(PhaseSymbol(Transform.PLUS_U0, 1.0), BeamState(1.0), BeamState(1.0), 8)
        with pytest.raises(ValidationError):
            decode(rows, 8, refine="spline")


def test_phi_grid_spans_half_turn():
    g = phi_grid(8)
    assert g[0] == 0.0 and g[-1] == pytest.approx(7 * math.pi / 8)
