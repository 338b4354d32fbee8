"""Relativistically invariant encodings of quantum information under Lorentz twirling."""

__version__ = "0.1.0"

from .encode import (DyonConfiguration, InvariantState, Species, TotalMomentumLabel, build_dyon_cell, decode_multiplicity,
                     encode_dyon_qubit, encode_dyon_state, encode_massive_equal_momentum,
                     encode_massless_helicity_sum, encode_total_momentum)
from .errors import (DimensionMismatchError, InvarianceWarning, KinematicsError, NumericalFailure,
                     SuperselectionError)
from .little_group import (FourMomentum, LorentzTransform, WignerElement, pairwise_phase, wigner_phase_massless,
                           wigner_rotation_massive)
from .schur import SchurBasis, build_schur_basis_su2, build_schur_basis_u1
from .slocc import SLOCCMeasure, slocc_proportionality, slocc_twirl
from .tensor import DenseOperator, StateVector, partial_trace
from .twirl import (GroupMeasure, LorentzSampler, TwirlReport, invariance_report, lorentz_rep_dyon,
                    lorentz_rep_massive, lorentz_rep_massless, lorentz_rep_total_momentum, twirl)
