"""Simulation and divisibility analysis of mixed qubit Pauli channels."""
from .channels import (DEPOL_MIXED, DEPOL_Q, DEPOL_R, FAMILIES, MARKOV_X, MARKOV_Y, MIXED_MM,
                       MIXED_NM_REPLICA, NM_X1, NM_X2, ChannelFamily, DecayRates, PauliProbs,
                       apply_pauli, chi_ideal, closed_form_rates, decay_rates, design_functions,
                       mix)
from .circuits import (Circuit, Gate, build_depol_circuit, build_flip_circuit,
                       build_total_mm_circuit, channel_from_circuit, sample_counts, simulate)
from .divisibility import (DivisibilityReport, Verdict, choi_from_transfer, intermediate_report,
                           intermediate_transfer, is_markovian, markovianity_scan,
                           process_fidelity, transfer_from_chi)
from .errors import *  # noqa: F401,F403
from .experiment import ExperimentConfig, ResultRecord, emit_outputs, resample_counts, run_experiment
from .qmath import hermitian_eigen, pseudo_inverse, trace_norm
from .reconstruction import CountsVector, MLEResult, chi_linear_inversion, mle_chi, run_tomography

__version__ = "0.1.0"
