"""mazerlab: coupled-channel workbench for a cold atom crossing a mesa cavity.

The package implements three views of the same physics and the tooling to
compare them: the published piecewise analytic solution of the detuned
crossing (claimed), the exact coupled-channel dynamics (solver), and the
residual/oracle machinery that measures where the first departs from the
second (verify).
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateThresholdError,
    GridMismatchError,
    InvalidParameterError,
    MazerError,
    NumericalDegeneracyError,
    OutOfValidityError,
    PacketSpecError,
    StabilityError,
)
from .model import (
    ChannelWavenumbers,
    DressedRotation,
    MesaMode,
    ModelParams,
    PhotonSector,
    SampledMode,
    bare_from_dressed,
    branch_sqrt,
    claimed_wavenumbers,
    coupling_off,
    dressed_angle,
    dressed_rotate,
    make_params,
    photon_distribution,
    potential_blocks,
    sector_hamiltonian,
    true_wavenumbers,
)
from .claimed import (
    ChannelScattering,
    ClaimedCoefficients,
    ClaimedStationaryState,
    PlaneWaveTerm,
    SourceConvention,
    assemble_claimed_state,
    claimed_coefficients,
    continuity_defects,
    per_channel_scattering,
    resonant_emission_probability,
)
from .solver import (
    AbsorbingLayer,
    Grid,
    StationarySolution,
    Trajectory,
    TwoChannelField,
    WavePacketSpec,
    energy_expectation,
    flux_probabilities,
    hamiltonian_apply,
    init_wavepacket,
    propagate,
    region_probabilities,
    rotate_field,
    stationary_scatter,
)
from .verify import (
    ResidualReport,
    SeparabilityAudit,
    SweepRow,
    basis_equivalence_check,
    claimed_residual,
    decoupled_residual,
    grid_residual_check,
    loglog_slope,
    matching_oracle,
    residual_sweep,
    separability_audit,
    transfer_matrix_scatter,
)
from .observables import ObservableSeries, aggregate_inversion, series_from_trajectory
from .config import RunConfig, SCENARIOS, apply_overrides, load_config, parse_config
from .runner import resolve_jobs, run
from .cli import main
