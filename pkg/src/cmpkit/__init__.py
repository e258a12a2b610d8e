"""Cavity magnon-polariton toolkit: demagnetization, FMR, polariton branches,
coupling estimates, synthetic spectra, branch fitting and table analysis."""

from .coupling import (CouplingResult, FieldMap, Regime, classify_regime, coupling_strength,
                       dsc_threshold_frequency, evaluate_coupling, filling_factor,
                       rank_field_maps, table_consistency)
from .demag import (DemagTensor, SampleGeometry, demag_diag, demag_offdiag, demag_tensor,
                    demag_tensor_points, demag_volume_average)
from .errors import (CmpkitError, DomainError, FitInputError, PhaseValidityError,
                     RankDeficiencyError, SingularDiamagneticError, UndefinedFillingFactorError,
                     UnsaturatedError, UnstableRegimeError)
from .fitting import FitProblem, FitResult, fit, initial_guess, symmetrize
from .fmr import FmrParams, fmr_frequency, fmr_frequency_masked, fmr_sweep, internal_field
from .polariton import (BranchPair, DispersionModelParams, Model, branches, dicke_full,
                        dicke_superradiant, hopfield, rwa, shifted_dicke, zero_field_gap)
from .spectra import BranchData, Spectrum2D, extract_branches, synthesize

__version__ = "0.1.0"
