"""Numerical laboratory for time-changed Markov semigroups.

Thin wrapper around the C++ core; see the project README for the full CLI.
"""

from tclab._core import (  # noqa: F401
    TclabError,
    ChainModel,
    DiffusionModel,
    SmoothMeasure,
    TraceGenerator,
    build_chain,
    make_diffusion,
    dual_model,
    bm_green,
    bm_green_alpha,
    chain_measure,
    diffusion_measure,
    lebesgue_measure,
    transition,
    resolvent_kernel,
    is_green_kato,
    potential_apply,
    timechanged_resolvent,
    hitting_apply,
    phi_A,
    trace_generator,
    semigroup_apply,
    integrated_semigroup,
    exact_fdd,
    mc_semigroup,
    mc_resolvent,
    mc_apotential,
    mc_fdd,
    normality_flags,
    resolvent_equation_residual,
)

__version__ = "0.1.0"
