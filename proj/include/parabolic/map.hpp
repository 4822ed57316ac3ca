#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "roots.hpp"

namespace parabolic {

/// Rational map num(z)/den(z) in reduced form. Polynomial maps have den == 1.
class MapExpr {
public:
    MapExpr() : num_(Poly::identity()), den_(Poly::constant(1.0)) {}
    explicit MapExpr(Poly num) : num_(std::move(num)), den_(Poly::constant(1.0)) {}
    MapExpr(Poly num, Poly den, const NumericConfig& cfg = default_config())
        : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw Error(ErrorCode::InvalidMap, "zero denominator");
        reduce(cfg);
    }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_polynomial() const { return den_.degree() == 0; }
    int degree() const { return std::max(num_.degree(), den_.degree()); }
    double max_abs_coeff() const { return std::max(num_.max_abs_coeff(), den_.max_abs_coeff()); }

    /// Polynomial view; throws InvalidMap for a genuinely rational map.
    const Poly& as_poly() const {
        if (!is_polynomial()) throw Error(ErrorCode::InvalidMap, "map is not a polynomial");
        return num_;
    }

    Complex eval(Complex z, const NumericConfig& cfg = default_config()) const {
        const Complex d = den_.eval_checked(z, cfg.overflow_modulus);
        if (std::abs(d) < cfg.pole_tol) throw Error(ErrorCode::PoleHit, "denominator vanishes");
        const Complex v = num_.eval_checked(z, cfg.overflow_modulus) / d;
        if (!(std::abs(v) <= cfg.overflow_modulus)) throw Error(ErrorCode::Overflow, "value exceeds modulus bound");
        return v;
    }
    Complex operator()(Complex z) const { return eval(z); }

    /// Quotient rule, reduced.
    MapExpr derivative(const NumericConfig& cfg = default_config()) const {
        if (is_polynomial()) return MapExpr(num_.derivative() * (1.0 / den_.coeff(0)), Poly::constant(1.0), cfg);
        return MapExpr(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_, cfg);
    }

    /// this(g(z)).
    MapExpr compose(const MapExpr& g, const NumericConfig& cfg = default_config()) const {
        if (g.is_polynomial()) {
            const Poly gp = g.num_ * (1.0 / g.den_.coeff(0));
            return MapExpr(num_.compose(gp), den_.compose(gp), cfg);
        }
        const int d = degree();
        auto homog = [&](const Poly& p) {
            Poly acc;
            std::vector<Poly> np{Poly::constant(1.0)}, dp{Poly::constant(1.0)};
            for (int k = 1; k <= d; ++k) {
                np.push_back(np.back() * g.num_);
                dp.push_back(dp.back() * g.den_);
            }
            for (int k = 0; k <= p.degree(); ++k)
                acc += p.coeff(k) * (np[static_cast<std::size_t>(k)] * dp[static_cast<std::size_t>(d - k)]);
            return acc;
        };
        return MapExpr(homog(num_), homog(den_), cfg);
    }

private:
    void reduce(const NumericConfig& cfg) {
        if (num_.is_zero()) {
            den_ = Poly::constant(1.0);
            return;
        }
        if (den_.degree() >= 1) {
            for (const auto& r : roots(den_, cfg)) {
                for (int k = 0; k < r.multiplicity; ++k) {
                    const double bound = 1e3 * num_.horner_error_bound(r.value) + 1e-14 * num_.max_abs_coeff();
                    if (std::abs(num_(r.value)) > bound) break;
                    num_ = num_.deflate(r.value).first;
                    den_ = den_.deflate(r.value).first;
                    if (num_.degree() < 1) break;
                }
            }
        }
        if (den_.degree() == 0) {
            num_ *= 1.0 / den_.coeff(0);
            den_ = Poly::constant(1.0);
        }
    }

    Poly num_;
    Poly den_;
};

/// f^l(z), with the usual PoleHit/Overflow failures.
inline Complex iterate(const MapExpr& f, Complex z, int l, const NumericConfig& cfg = default_config()) {
    for (int k = 0; k < l; ++k) z = f.eval(z, cfg);
    return z;
}

/// Multiplier (f^l)'(z) along the orbit of z.
inline Complex cycle_multiplier(const MapExpr& f, Complex z, int l, const NumericConfig& cfg = default_config()) {
    const MapExpr df = f.derivative(cfg);
    Complex m = 1.0;
    for (int k = 0; k < l; ++k) {
        m *= df.eval(z, cfg);
        z = f.eval(z, cfg);
    }
    return m;
}

/// f composed with itself l times.
inline MapExpr compose_power(const MapExpr& f, int l, const NumericConfig& cfg = default_config()) {
    if (l < 1) throw Error(ErrorCode::InvalidArgument, "iteration count must be positive");
    double deg = std::pow(static_cast<double>(f.degree()), l);
    if (deg > cfg.degree_guard) throw Error(ErrorCode::DegreeGuard, "degree d^l = " + std::to_string(deg) + " too large");
    MapExpr g = f;
    for (int k = 1; k < l; ++k) g = f.compose(g, cfg);
    return g;
}

/// Polynomial whose roots are the fixed points of f^l: num_l - z * den_l.
inline Poly fixed_point_poly(const MapExpr& f, int l, const NumericConfig& cfg = default_config()) {
    if (f.degree() < 1) throw Error(ErrorCode::InvalidMap, "map of degree < 1");
    const MapExpr g = compose_power(f, l, cfg);
    return g.num() - Poly::identity() * g.den();
}

}  // namespace parabolic
