"""Front tracking for u_t + f(x, u)_x = 0 with heterogeneous, uniformly convex flux."""

from ._core import (
    ApproxFlux,
    AssumptionReport,
    ConfigError,
    Event,
    Flux,
    FluxExpr,
    Front,
    FrontField,
    FrontTracker,
    InvariantBreach,
    ParseError,
    QuantizedData,
    WindowExit,
    audit_assumptions,
    build_fan,
    certify,
    characteristic_check,
    classify,
    differentiate,
    front_speed,
    fv_reference,
    g_of,
    initial_fronts,
    invert_level,
    inversion_gap_bound,
    make_builtin_flux,
    make_expr_flux,
    parse,
    parse_config,
    quantize_initial,
    resolve_collision,
    run,
    sample_g,
    sample_z,
    tv_g,
)

__version__ = "0.1.0"
