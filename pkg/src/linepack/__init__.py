"""Low-coherence line packings in C^d: annealed log-sum-exp trust-region search,
coherence bounds and certificates, an alternating-projection baseline and
MISO beamforming evaluation."""

from .analysis import (BoundsReport, Certificate, bounds_report, check_etf, check_tight,
                       conjecture1_target, mub_removal_target, naimark_complement,
                       one_distance_report, welch_bound)
from .baseline import AltProjConfig, alternating_projection
from .beamforming import ChannelModel, distortion_mc, quantize, snr
from .frames import (Frame, GramSummary, ZeroColumnError, angle_spectrum, chordal_distance,
                     coherence, gram_summary, normalize_columns)
from .smoothing import SmoothObjective, eval_objective, hessian_vector_product, lse_partials
from .solver import SolverConfig, SolveResult, anneal, default_delta_schedule, random_frame, solve
from .trustregion import TrustRegionConfig, steihaug_cg, trust_region_minimize

__version__ = "0.1.0"
