"""Meridional-plane solver for the axisymmetric Navier-Stokes-Boussinesq
system, with a verification harness that monitors and asserts the
quantitative a priori estimates the global-regularity theory provides."""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    MeridionalGrid,
    Parity,
    ScalarField2D,
    VelocityField,
    axis_quotient,
    azimuthal_vector_h1,
    divergence,
    h1_seminorm,
    lp_norm,
    read_field,
    volume_integral,
    write_field,
    zero_field,
    zero_velocity,
)
from .elliptic import (  # noqa: F401
    StreamSolver,
    biot_savart_direct,
    solve_streamfunction,
    velocity_from_streamfunction,
    velocity_from_vorticity,
    vr_over_r,
)
from .evolution import (  # noqa: F401
    FlowState,
    StepControl,
    Stepper,
    advect_density,
    initial_state,
    run,
    step,
    vorticity_rhs,
)
from .flowmap import (  # noqa: F401
    ParticleSet,
    SupportMetrics,
    VelocityHistory,
    advance_particles,
    axis_distance_bounds_check,
    rho_over_r_bound_check,
    support_metrics,
    triad_jacobian,
)
from .diagnostics import (  # noqa: F401
    DiagnosticsRecord,
    InequalityCheck,
    evaluate_checks,
    record,
)
from .lpaley import (  # noqa: F401
    CutoffPair,
    DyadicDecomposition,
    bernstein_ratio,
    besov_norm,
    dyadic_blocks,
    embed_cartesian,
)
from .initdata import (  # noqa: F401
    RingParams,
    annular_density,
    gaussian_vortex_ring,
    mollify,
)
from .config import RunConfig, load_config, parse_config  # noqa: F401
