"""Fourier extension estimates and distance sets over finite fields."""

from ._ffext import (
    FfextError,
    Field,
    PlaneFunction,
    Poly,
    Variety,
    SurfaceMeasure,
    LevelSetFamily,
    parse_poly,
    forward_ft,
    inverse_ft,
    dual_ft,
    convolve,
    norm_lp,
    extend,
    rstar_ratio,
    estimate_rstar,
    additive_energy,
    rstar_upper_bound_2_4,
    necessary_conditions,
    analyze_extension,
    counting_function,
    distance_set,
    sphere_ft_explicit,
    keylemma_sum,
    double_decay_sum,
    second_moment_decomposition,
    falconer_experiment,
    run_suite,
)

__all__ = [name for name in dir() if not name.startswith("_")]
