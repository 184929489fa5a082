"""Approximate maximum subdeterminant and maximum volume simplex via design relaxations."""
from .design import (
    DesignResult,
    DualWitness,
    GapCertificate,
    delta_j,
    design_matrix,
    dual_witness,
    gamma_j,
    solve_design,
    supergradient,
    threshold_index,
    verify_certificate,
)
from .errors import *  # noqa: F401,F403
from .linalg import (
    Spectrum,
    cholesky_psd,
    eigen_sym,
    elementary_symmetric,
    log_elementary_symmetric,
    logdet_submatrix,
    projector_complement,
)
from .problems import (
    Detlb2Result,
    MsdInstance,
    MvsInstance,
    MvsResult,
    detlb2_sweep,
    msd_approx,
    msd_oracle,
    mvs_approx,
    mvs_oracle,
    mvs_reduce,
)
from .rounding import (
    Selection,
    derandomized_select,
    log_guarantee_factor,
    phi_potential,
    rip_select,
    sample_select,
)

__version__ = "0.1.0"
