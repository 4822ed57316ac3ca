#pragma once

#include <cstddef>

namespace parabolic {

/// All numerical tolerances used by the library. Every operation that needs
/// one takes a `const NumericConfig&` (defaulted), so experiments can override
/// them in one place.
struct NumericConfig {
    // mapcore
    double pole_tol = 1e-300;
    double overflow_modulus = 1e100;
    int degree_guard = 64;
    double root_merge_tol = 1e-9;
    double root_residual_tol = 1e-9;
    int root_max_iter = 500;

    // fixsplit
    int quad_nodes_initial = 1024;
    int quad_nodes_max = 65536;
    double quad_tol = 1e-10;
    double fp_on_contour_tol = 1e-12;
    double at_parabolic_tol = 1e-12;
    double boundary_root_tol = 1e-8;
    double degenerate_tol = 1e-10;
    double index_consistency_tol = 1e-8;
    double divergence_threshold = 50.0;
    double bounded_threshold = 10.0;
    double min_contour_radius = 1e-6;

    // gateflow
    double rk_rel_tol = 1e-10;
    double rk_abs_tol = 1e-12;
    double stall_tol = 1e-11;
    double arclength_factor = 1e6;
    double endpoint_match_factor = 10.0;
};

inline const NumericConfig& default_config() {
    static const NumericConfig cfg{};
    return cfg;
}

}  // namespace parabolic
