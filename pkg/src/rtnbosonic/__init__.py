"""Bosonic codes under random telegraph and 1/f dephasing: channels, non-Markovianity, Knill EC."""

from .errors import (ConfigError, DegeneratePrimitive, DomainError, GridTooSmall,
                     NotCompletelyPositive, NotConverged, TruncationWarning)
from .fock import Channel, trace_norm
from .noise import (GaussianDephasing, LossParams, NoiseModel, OneOverFDephasing, OneOverFParams,
                    RTNDephasing, RTNParams, exp_integral_e1, loss_kraus, one_over_f_factor,
                    rtn_dephasing_factor)
from .nonmarkov import (RevivalReport, TraceDistanceSeries, analytic_fock_pair_blp, blp_star,
                        gaussian_blp_sweep, n_wn, trace_distance)
from .qec import (CijTensor, KnillConfig, average_gate_fidelity, break_even_fidelity, cij_tensor,
                  crot, decode_and_recover, fidelity_bound, knill_fidelity, noise_strength,
                  phase_povm_bin, semi_analytic_fidelity_dephasing)
from .states import GaussianParams, RSBCode, coherent_state, fock_state, gaussian_state
from .wigner import WignerGrid, negativity_volume, ring_negativity, wigner

__version__ = "0.1.0"
