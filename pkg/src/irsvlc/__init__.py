"""IRS-aided visible light communication: secrecy rate and IRS unit assignment."""

from irsvlc.approx import ApproxState, build_approx, lemma1_coeffs, linearized_rate
from irsvlc.assign import (KmOptions, KmResult, Matching, exhaustive_oracle, hungarian_max,
                           iterative_km, random_assignment)
from irsvlc.channel import GainSet, gain_set, los_gain, nlos_gain
from irsvlc.config import ScenarioConfig, load_config, reference_config
from irsvlc.rate import RateReport, check_assignment, secrecy_rate
from irsvlc.scene import PhysConsts, Scene, ServiceModel, build_scene, service_model

__version__ = "0.1.0"
