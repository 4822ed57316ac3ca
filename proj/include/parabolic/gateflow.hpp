#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "gate_vector.hpp"
#include "gatetree.hpp"
#include "map.hpp"
#include "ode.hpp"

namespace parabolic {

struct FlowOptions {
    bool time_reversed = false;
    std::size_t max_steps = 2000000;
};

struct Trajectory {
    std::vector<std::pair<double, Complex>> samples;  ///< increasing in t; the seed is at t = 0
    std::optional<Complex> forward_limit;             ///< empty when the trajectory escaped
    std::optional<Complex> backward_limit;
};

namespace detail {

struct HalfFlow {
    std::vector<std::pair<double, Complex>> samples;
    std::optional<Complex> limit;
};

inline HalfFlow flow_half(const MapExpr& f, Complex rot, Complex seed, double r_outer, const NumericConfig& cfg,
                          std::size_t max_steps) {
    auto field = [&](Complex z) { return rot * (f.eval(z, cfg) - z); };
    HalfFlow out;
    Complex z = seed, v = field(z);
    double t = 0.0, arclength = 0.0;
    out.samples.emplace_back(t, z);
    if (std::abs(v) < cfg.stall_tol) throw Error(ErrorCode::Stalled, "vector field vanishes at the seed");
    double h = 1e-2 * r_outer / std::abs(v);
    const double budget = cfg.arclength_factor * r_outer;
    bool left_seed = false;
    for (std::size_t step = 0; step < max_steps;) {
        Complex err, v_next;
        const Complex z_next = dopri5_step(field, z, v, h, err, v_next);
        const double scale = cfg.rk_abs_tol + cfg.rk_rel_tol * std::max(std::abs(z), std::abs(z_next));
        const double ratio = std::abs(err) / scale;
        if (!(ratio <= 1.0)) {
            h = std::isfinite(ratio) ? dopri5_next_step(h, ratio) : h * 0.2;
            if (t + h == t) throw Error(ErrorCode::StepUnderflow, "step size underflow at " + format_complex(z));
            continue;
        }
        ++step;
        // closed orbit: the trajectory comes back to its seed
        if (left_seed) {
            const Complex d = z_next - z;
            const double len2 = std::norm(d);
            const double s = len2 > 0 ? std::clamp(((seed - z) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
            if (std::abs(z + s * d - seed) < 1e-6 * r_outer)
                throw Error(ErrorCode::Stalled, "closed orbit through " + format_complex(seed));
        } else if (std::abs(z_next - seed) > 1e-2 * r_outer) {
            left_seed = true;
        }
        arclength += std::abs(z_next - z);
        t += h;
        z = z_next;
        v = v_next;
        out.samples.emplace_back(t, z);
        if (std::abs(z) > 2.0 * r_outer) return out;
        if (std::abs(v) < cfg.stall_tol) {
            out.limit = z;
            return out;
        }
        if (arclength > budget) throw Error(ErrorCode::Stalled, "arclength budget exhausted");
        h = dopri5_next_step(h, ratio);
    }
    throw Error(ErrorCode::Stalled, "step budget exhausted");
}

}  // namespace detail

/// Integrates z' = e^{i phi} i (f(z) - z) from `seed` forward and backward in time.
inline Trajectory flow(const MapExpr& f, double phi, Complex seed, double r_outer,
                       const NumericConfig& cfg = default_config(), const FlowOptions& opt = {}) {
    if (!(std::abs(phi) < pi / 4)) throw Error(ErrorCode::InvalidArgument, "|phi| must be below pi/4");
    if (!(r_outer > 0.0) || std::abs(seed) > 2.0 * r_outer)
        throw Error(ErrorCode::InvalidArgument, "seed outside |z| <= 2 r_outer");
    const Complex rot = I * std::exp(I * phi) * (opt.time_reversed ? -1.0 : 1.0);
    auto fwd = detail::flow_half(f, rot, seed, r_outer, cfg, opt.max_steps);
    auto bwd = detail::flow_half(f, -rot, seed, r_outer, cfg, opt.max_steps);
    Trajectory tr;
    for (auto it = bwd.samples.rbegin(); it != bwd.samples.rend(); ++it)
        if (it->first > 0) tr.samples.emplace_back(-it->first, it->second);
    tr.samples.insert(tr.samples.end(), fwd.samples.begin(), fwd.samples.end());
    tr.forward_limit = fwd.limit;
    tr.backward_limit = bwd.limit;
    return tr;
}

struct SeedEndpoints {
    int k = 0;
    int sign = 0;  ///< -1 for z_{k,-}, +1 for z_{k,+}
    Complex seed;
    std::optional<Complex> forward_limit, backward_limit;
    int forward_index = -1, backward_index = -1;  ///< matched fixed point, -1 if none
};

struct GateDetection {
    double phi = 0.0;
    double r0 = 0.0;
    int nu = 0;
    std::vector<Complex> fixed_points;
    std::vector<SeedEndpoints> endpoints;  ///< order (1,-), (1,+), (2,-), ...
    GateVector gate;
    bool well_behaved = false;
    std::string reason;

    const SeedEndpoints& seed(int k, int sign) const {
        return endpoints.at(static_cast<std::size_t>(2 * (k - 1) + (sign > 0 ? 1 : 0)));
    }
};

class NotWellBehavedError : public Error {
public:
    NotWellBehavedError(int seed_index, const std::string& reason, GateDetection partial)
        : Error(ErrorCode::NotWellBehaved, "seed " + std::to_string(seed_index) + ": " + reason),
          seed_index_(seed_index), partial_(std::move(partial)) {
        partial_.well_behaved = false;
        partial_.reason = reason;
    }
    int seed_index() const noexcept { return seed_index_; }
    const GateDetection& partial() const noexcept { return partial_; }

private:
    int seed_index_;
    GateDetection partial_;
};

namespace detail {

/// Distance from a fixed point within which a stalled trajectory is attributed
/// to it: the stall radius |z - sigma| ~ (stall_tol / |a_m|)^(1/m), m the
/// multiplicity and a_m the leading Taylor coefficient of f(z) - z at sigma.
inline double match_radius(const MapExpr& f, Complex sigma, const NumericConfig& cfg) {
    const Poly p = f.num() - Poly::identity() * f.den();
    const Complex den = f.den()(sigma);
    const double scale = std::max(1.0, p.max_abs_coeff());
    Poly d = p;
    double factorial = 1.0;
    for (int m = 1; m <= std::max(1, p.degree()); ++m) {
        d = d.derivative();
        factorial *= m;
        const double am = std::abs(d(sigma) / factorial / den);
        if (am > 1e-8 * scale) {
            const double r = std::pow(cfg.stall_tol / am, 1.0 / m);
            return std::max(cfg.endpoint_match_factor * cfg.root_merge_tol, cfg.endpoint_match_factor * r);
        }
    }
    return cfg.endpoint_match_factor * cfg.root_merge_tol;
}

}  // namespace detail

/// Flows from the 2 nu petal seeds and reads off the gate structure.
inline GateDetection detect_gates(const MapExpr& f, int nu, double phi, double r0,
                                  const std::vector<Complex>& fixed_points,
                                  const NumericConfig& cfg = default_config()) {
    if (nu < 1) throw Error(ErrorCode::InvalidArgument, "nu must be positive");
    if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "r0 must be positive");
    for (Complex s : fixed_points)
        if (!(std::abs(s) < r0 / 2))
            throw Error(ErrorCode::CoordinateMismatch, "fixed point " + format_complex(s) + " outside |z| < r0/2");
    if (f.is_polynomial()) {
        const Complex lead = (f.num() - Poly::identity()).coeff(nu + 1);
        if (std::abs(lead) == 0.0 || std::abs(std::arg(lead)) > 0.25)
            throw Error(ErrorCode::CoordinateMismatch,
                        "coefficient of z^" + std::to_string(nu + 1) + " in f(z) - z is not positive real");
    }

    GateDetection det;
    det.phi = phi;
    det.r0 = r0;
    det.nu = nu;
    det.fixed_points = fixed_points;
    std::vector<double> radius;
    for (Complex s : fixed_points) radius.push_back(detail::match_radius(f, s, cfg));
    auto match = [&](const std::optional<Complex>& z) {
        if (!z) return -1;
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < fixed_points.size(); ++j) {
            const double d = std::abs(*z - fixed_points[j]);
            if (d <= radius[j] && d < bd) {
                bd = d;
                best = static_cast<int>(j);
            }
        }
        return best;
    };

    for (int k = 1; k <= nu; ++k)
        for (int sign : {-1, 1}) {
            SeedEndpoints e;
            e.k = k;
            e.sign = sign;
            e.seed = r0 * std::exp(I * (2.0 * pi * (k - 1) / nu + (sign > 0 ? pi / nu : 0.0)));
            const int index = static_cast<int>(det.endpoints.size());
            try {
                const auto tr = flow(f, phi, e.seed, r0, cfg);
                e.forward_limit = tr.forward_limit;
                e.backward_limit = tr.backward_limit;
            } catch (const Error& err) {
                det.endpoints.push_back(e);
                throw NotWellBehavedError(index, err.what(), det);
            }
            e.forward_index = match(e.forward_limit);
            e.backward_index = match(e.backward_limit);
            det.endpoints.push_back(e);
            if (!e.forward_limit || !e.backward_limit) throw NotWellBehavedError(index, "trajectory escaped", det);
            if (e.forward_index < 0 || e.backward_index < 0)
                throw NotWellBehavedError(index, "trajectory limit matches no fixed point", det);
        }

    std::vector<int> g(static_cast<std::size_t>(nu), GateVector::closed);
    for (int k = 1; k <= nu; ++k) {
        const auto& p = det.seed(k, 1);
        if (p.forward_index == p.backward_index) continue;
        for (int j = 1; j <= nu; ++j) {
            const auto& m = det.seed(j, -1);
            if (m.forward_index != p.forward_index || m.backward_index != p.backward_index) continue;
            if (g[static_cast<std::size_t>(k - 1)] != GateVector::closed)
                throw NotWellBehavedError(2 * (k - 1) + 1, "petal joins more than one gate", det);
            g[static_cast<std::size_t>(k - 1)] = j;
        }
    }
    det.gate = GateVector(g);
    const auto adm = check_admissible(det.gate);
    if (!adm.admissible) throw NotWellBehavedError(0, "inadmissible picture " + det.gate.to_string(), det);
    det.well_behaved = true;
    return det;
}

struct GateSweep {
    std::optional<GateDetection> detection;
    std::vector<std::pair<double, std::string>> rejected;  ///< angle and reason
};

inline std::vector<double> default_phi_grid() {
    return {0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.4, -0.4, 0.5, -0.5, 0.6, -0.6, 0.7, -0.7};
}

/// Tries the angles in order and keeps the first well-behaved detection.
inline GateSweep detect_gates_sweep(const MapExpr& f, int nu, double r0, const std::vector<Complex>& fixed_points,
                                    const std::vector<double>& phis = default_phi_grid(),
                                    const NumericConfig& cfg = default_config()) {
    GateSweep out;
    for (double phi : phis) {
        try {
            out.detection = detect_gates(f, nu, phi, r0, fixed_points, cfg);
            return out;
        } catch (const NotWellBehavedError& e) {
            out.rejected.emplace_back(phi, e.what());
        }
    }
    return out;
}

/// r0 = 4 max|sigma| over the split points, kept below half the distance to any
/// other fixed point.
inline double default_r0(const std::vector<Complex>& split_points, const std::vector<Complex>& other_points) {
    double mx = 0.0, cap = std::numeric_limits<double>::infinity();
    for (Complex s : split_points) mx = std::max(mx, std::abs(s));
    for (Complex w : other_points) cap = std::min(cap, std::abs(w) / 2.0);
    if (mx > 0.0) return std::min(4.0 * mx, cap);
    return 0.25 * std::min(cap, 1.0);
}

/// Fixed point index for every tree vertex: the upper face of gate k holds the
/// forward limit of the trajectory from z_{k,+}, the lower face its backward limit.
inline std::vector<int> assign_vertices(const GateTree& tree, const GateDetection& det) {
    std::vector<int> v(static_cast<std::size_t>(tree.vertex_count()), -1);
    auto put = [&](int vertex, int fp, int k) {
        auto& slot = v[static_cast<std::size_t>(vertex)];
        if (slot >= 0 && slot != fp)
            throw NotWellBehavedError(2 * (k - 1) + 1, "faces of gate " + std::to_string(k) + " disagree on fixed points", det);
        slot = fp;
    };
    for (const auto& e : tree.edges()) {
        const auto& s = det.seed(e.gate, 1);
        put(e.upper, s.forward_index, e.gate);
        put(e.lower, s.backward_index, e.gate);
    }
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw NotWellBehavedError(0, "two faces share a fixed point", det);
    return v;
}

inline void write_detection(std::ostream& os, const GateDetection& det) {
    for (const auto& e : det.endpoints) {
        os << e.k << ',' << (e.sign > 0 ? '+' : '-') << ','
           << (e.forward_limit ? format_complex(*e.forward_limit) : std::string("escaped")) << ','
           << (e.backward_limit ? format_complex(*e.backward_limit) : std::string("escaped")) << ','
           << e.forward_index << '/' << e.backward_index << '\n';
    }
    os << "gate_vector = [";
    for (std::size_t k = 0; k < det.gate.entries().size(); ++k) {
        const int g = det.gate.entries()[k];
        os << (k ? "," : "") << (g == GateVector::closed ? std::string("*") : std::to_string(g));
    }
    os << "]\nwell_behaved = " << (det.well_behaved ? "true" : "false") << '\n';
    if (!det.reason.empty()) os << "reason = " << det.reason << '\n';
}

}  // namespace parabolic
