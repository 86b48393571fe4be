"""Simulation and analysis of multi-bit longitudinal + transverse phase coding."""

from .capacity import BudgetRegime, PhotonBudget, optimize_capacity, photons_of_state, required_squeezing
from .channel import channel_sim
from .detection import BeamState, DetectionResult, decode, noise_variance, sample_shot_noise, simulate_detection
from .encoding import PhaseSymbol, PitSpec, Transform, apply_transform, bits_to_track, pit_to_symbol, quantize_theta
from .errors import BelowThresholdError, PhaseCodeError, UnresolvableError, ValidationError
from .modes import SpatialGrid, TransverseMode, make_flipped, make_tem00, overlap
from .noise import delta_theta_min, l_max, snr
from .spectral import MeasurementWindow, PSDCurve, band_snr, peak_and_bandwidth, psd_consecutive, psd_single

__version__ = "0.1.0"
