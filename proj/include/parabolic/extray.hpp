#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "map.hpp"

namespace parabolic {

struct RaySample {
    double theta = 0.0;
    std::vector<std::pair<double, Complex>> samples;  ///< potential descending
    bool truncated = false;                           ///< Newton stopped converging before t_end
    std::string stop_reason;
};

struct RayOptions {
    int steps_per_halving = 8;   ///< Newton steps per factor d of potential
    double lift_potential = 20;  ///< pull back from d^k t >= this, where phi(z) ~ z
    int newton_max_iter = 60;
};

namespace detail {

/// f^k and (f^k)' at z.
inline std::pair<Complex, Complex> iterate_with_derivative(const Poly& p, Complex z, int k) {
    Complex d = 1.0;
    for (int j = 0; j < k; ++j) {
        const auto [v, dv] = p.eval_with_derivative(z);
        d *= dv;
        z = v;
    }
    return {z, d};
}

inline int pullback_depth(double t, int d, double lift) {
    if (t >= lift) return 0;
    return static_cast<int>(std::ceil(std::log(lift / t) / std::log(static_cast<double>(d)) - 1e-12));
}

/// Point of potential t and angle theta: solves f^k(z) = exp(d^k (t + 2 pi i theta))
/// by Newton from `guess`.
inline std::optional<Complex> ray_point(const Poly& p, double t, double theta, Complex guess, const RayOptions& opt) {
    const int d = p.degree();
    const int k = pullback_depth(t, d, opt.lift_potential);
    double scale = 1.0, angle = theta;
    for (int j = 0; j < k; ++j) {
        scale *= d;
        angle = std::fmod(angle * d, 1.0);
    }
    const Complex w = std::exp(Complex(scale * t, 2.0 * pi * angle));
    if (k == 0) return w;
    Complex z = guess;
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        const auto [v, dv] = iterate_with_derivative(p, z, k);
        if (!is_finite(v) || std::abs(dv) == 0.0) return std::nullopt;
        const Complex step = (v - w) / dv;
        if (!is_finite(step)) return std::nullopt;
        z -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) return z;
    }
    return std::nullopt;
}

struct Centered {
    Poly p;
    Complex shift;  ///< original z = w + shift
};

/// Conjugates a monic polynomial by translation so its z^{d-1} coefficient vanishes.
inline Centered center_monic(const MapExpr& f) {
    if (!f.is_polynomial() || f.degree() < 2) throw Error(ErrorCode::InvalidArgument, "rays need a polynomial of degree >= 2");
    const Poly p = f.as_poly();
    const int d = p.degree();
    if (std::abs(p.leading() - 1.0) > 1e-14) throw Error(ErrorCode::InvalidArgument, "rays need a monic polynomial");
    const Complex c = p.coeff(d - 1) / static_cast<double>(d);
    const Poly shift = Poly::identity() - Poly::constant(c);
    return {p.compose(shift) + Poly::constant(c), -c};
}

}  // namespace detail

inline double default_t_start(const MapExpr& f) { return std::log(2.0 + f.max_abs_coeff()); }

/// Green function estimate lim log|f^k(z)| / d^k, 0 if the orbit stays bounded.
inline double green_potential(const MapExpr& f, Complex z, int max_iter = 2000) {
    const Poly p = f.as_poly();
    const double d = p.degree();
    double scale = 1.0;
    for (int k = 0; k < max_iter; ++k) {
        if (std::abs(z) > 1e12) return std::log(std::abs(z)) / scale;
        z = p(z);
        scale *= d;
    }
    return 0.0;
}

/// External ray of angle theta from potential t_start down to t_end on the
/// ladder t_m = t_start d^{-m/S}.
inline RaySample trace_ray(const MapExpr& f, double theta, double t_start, double t_end, const RayOptions& opt = {}) {
    if (!(t_end > 0.0 && t_end < t_start)) throw Error(ErrorCode::InvalidArgument, "need 0 < t_end < t_start");
    if (opt.steps_per_halving < 1) throw Error(ErrorCode::InvalidArgument, "steps_per_halving must be positive");
    const auto c = detail::center_monic(f);
    const int d = c.p.degree();
    const double ratio = std::pow(static_cast<double>(d), -1.0 / opt.steps_per_halving);
    theta -= std::floor(theta);

    RaySample ray;
    ray.theta = theta;
    // walk in from far out, where the ray is the radial line, to t_start
    const int lead_in = static_cast<int>(
        std::ceil(opt.steps_per_halving * std::log(std::max(opt.lift_potential / t_start, 1.0)) / std::log(double(d))));
    Complex z = std::exp(Complex(t_start * std::pow(ratio, -lead_in), 2.0 * pi * theta));
    for (int j = lead_in; j > 0; --j) {
        const auto next = detail::ray_point(c.p, t_start * std::pow(ratio, -j), theta, z, opt);
        if (!next) throw Error(ErrorCode::NewtonDivergence, "ray does not converge above t_start");
        z = *next;
    }
    for (int m = 0;; ++m) {
        const double t = t_start * std::pow(ratio, m);
        if (t < t_end * (1.0 - 1e-12)) break;
        const auto next = detail::ray_point(c.p, t, theta, z, opt);
        if (!next) {
            if (ray.samples.empty()) throw Error(ErrorCode::NewtonDivergence, "no ray point at potential " + format_real(t));
            ray.truncated = true;
            ray.stop_reason = "Newton diverged below potential " + format_real(ray.samples.back().first);
            break;
        }
        z = *next;
        ray.samples.emplace_back(t, z + c.shift);
    }
    return ray;
}

inline RaySample trace_ray(const MapExpr& f, double theta, double t_end) {
    return trace_ray(f, theta, default_t_start(f), t_end);
}

namespace detail {
/// Position on the ray at potential t, linear in log t between samples.
inline std::optional<Complex> ray_at(const RaySample& r, double t) {
    const auto& s = r.samples;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double hi = s[i].first, lo = s[i + 1].first;
        if (t <= hi && t >= lo) {
            const double u = (std::log(hi) - std::log(t)) / (std::log(hi) - std::log(lo));
            return s[i].second + u * (s[i + 1].second - s[i].second);
        }
    }
    if (!s.empty() && std::abs(t - s.front().first) <= 1e-12 * t) return s.front().second;
    return std::nullopt;
}
}  // namespace detail

/// sup of |z_a(t) - z_b(t)| over the common potentials below t_cut.
inline double ray_tail_distance(const RaySample& a, const RaySample& b, double t_cut) {
    if (a.samples.empty() || b.samples.empty()) throw Error(ErrorCode::PotentialMismatch, "empty ray");
    const double hi = std::min({t_cut, a.samples.front().first, b.samples.front().first});
    const double lo = std::max(a.samples.back().first, b.samples.back().first);
    if (!(lo <= hi)) throw Error(ErrorCode::PotentialMismatch, "rays share no potential range below the cut");
    std::vector<double> ts{hi, lo};
    for (const auto* r : {&a, &b})
        for (const auto& [t, z] : r->samples)
            if (t <= hi && t >= lo) ts.push_back(t);
    double worst = 0.0;
    for (double t : ts) {
        const auto za = detail::ray_at(a, t), zb = detail::ray_at(b, t);
        if (za && zb) worst = std::max(worst, std::abs(*za - *zb));
    }
    return worst;
}

/// max |f(z_theta(t)) - z_{d theta}(d t)| over samples with a partner on the
/// image ray; both rays must share t_start and the step count.
inline double pushforward_residual(const MapExpr& f, const RaySample& ray, const RaySample& image, int steps_per_halving = 8) {
    const Poly p = f.as_poly();
    double worst = 0.0;
    const auto s = static_cast<std::size_t>(steps_per_halving);
    for (std::size_t m = s; m < ray.samples.size(); ++m) {
        if (m - s >= image.samples.size()) break;
        worst = std::max(worst, std::abs(p(ray.samples[m].second) - image.samples[m - s].second));
    }
    return worst;
}

/// max |G(z) - t| over the samples.
inline double green_residual(const MapExpr& f, const RaySample& ray) {
    double worst = 0.0;
    for (const auto& [t, z] : ray.samples) worst = std::max(worst, std::abs(green_potential(f, z) - t));
    return worst;
}

inline void write_csv(std::ostream& os, const RaySample& r) {
    os << "theta,potential,x,y\n";
    char buf[160];
    for (const auto& [t, z] : r.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.theta, t, z.real(), z.imag());
        os << buf;
    }
}

}  // namespace parabolic
