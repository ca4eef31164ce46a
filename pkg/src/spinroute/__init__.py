"""Simulator and pulse-schedule compiler for perfect quantum routing on
engineered XX spin networks."""

from .compiler import (
    BlockCalibration,
    Packet,
    RoutePlan,
    ScheduledPacket,
    calibrate_block,
    commutator_controllability,
    commutator_report,
    compile_1d_route,
    compile_hop,
    compile_injection_1d,
    compile_phase_program,
    compile_route,
    entangler_coefficients,
    merge_timelines,
    plan_1d_route,
    plan_path,
    route_plan,
    route_report,
    schedule_multi,
)
from .dyn import (
    Evolve,
    ExcitationState,
    PhaseSet,
    PulseSchedule,
    SectorBasis,
    SpectralCache,
    apply_phase_set,
    evolve,
    fidelity_up_to_phase,
    run_schedule,
    sector_hamiltonian,
    spectral_cache,
    transfer_time,
)
from .errors import (
    CalibrationError,
    CompileError,
    NoRouteError,
    SeparationError,
    UnsupportedInputError,
)
from .net import (
    BasisMap,
    BlockTemplate,
    CouplingGraph,
    LatticeSpec,
    SiteId,
    TiledNetwork,
    build_prototype_1d,
    build_pst_chain,
    build_star_block,
    lambda_basis_1d,
    lambda_state,
    network_from_json,
    network_to_json,
    pst_chain_couplings,
    reflection_with_sign,
    tile_network,
    v_pair_basis,
    w_state,
)
from .verify import (
    FaultMap,
    PercolationResult,
    check_star_reflection,
    direct_sum_residual,
    percolation_estimate,
    reachability,
)

__version__ = "0.1.0"
