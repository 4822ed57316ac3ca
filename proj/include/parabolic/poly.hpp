#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <vector>

#include "complex.hpp"
#include "config.hpp"
#include "error.hpp"

namespace parabolic {

/// Dense polynomial with complex coefficients, lowest degree first.
/// Trailing zero coefficients are trimmed; the zero polynomial has no coefficients.
class Poly {
public:
    Poly() = default;
    Poly(std::initializer_list<Complex> c) : c_(c) { trim(); }
    explicit Poly(std::vector<Complex> c) : c_(std::move(c)) { trim(); }

    static Poly constant(Complex a) { return Poly(std::vector<Complex>{a}); }
    static Poly monomial(Complex a, int n) {
        std::vector<Complex> c(static_cast<std::size_t>(n) + 1, Complex{});
        c.back() = a;
        return Poly(std::move(c));
    }
    static Poly identity() { return monomial(1.0, 1); }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
    const std::vector<Complex>& coeffs() const { return c_; }
    Complex coeff(int k) const {
        return k >= 0 && k < static_cast<int>(c_.size()) ? c_[static_cast<std::size_t>(k)] : Complex{};
    }
    Complex leading() const { return c_.empty() ? Complex{} : c_.back(); }

    double max_abs_coeff() const {
        double m = 0.0;
        for (auto a : c_) m = std::max(m, std::abs(a));
        return m;
    }

    /// Horner evaluation; no overflow checks.
    Complex operator()(Complex z) const {
        Complex acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
        return acc;
    }

    /// Horner evaluation that reports the value together with the derivative.
    std::pair<Complex, Complex> eval_with_derivative(Complex z) const {
        Complex p{}, dp{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            dp = dp * z + p;
            p = p * z + *it;
        }
        return {p, dp};
    }

    /// Horner evaluation failing with Overflow once an intermediate exceeds `limit`.
    Complex eval_checked(Complex z, double limit) const {
        Complex acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            acc = acc * z + *it;
            if (!(std::abs(acc) <= limit)) throw Error(ErrorCode::Overflow, "polynomial value exceeds modulus bound");
        }
        return acc;
    }

    /// Running-error bound for Horner at z (Higham), in units of the unit roundoff.
    double horner_error_bound(Complex z) const {
        double acc = 0.0;
        const double r = std::abs(z);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + std::abs(*it);
        return acc * (4.0 * (degree() + 1)) * 1.1102230246251565e-16;
    }

    Poly derivative() const {
        if (c_.size() <= 1) return {};
        std::vector<Complex> d(c_.size() - 1);
        for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * static_cast<double>(k);
        return Poly(std::move(d));
    }

    Poly& operator+=(const Poly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
        trim();
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
        for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
        trim();
        return *this;
    }
    Poly& operator*=(Complex a) {
        for (auto& x : c_) x *= a;
        trim();
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, Complex s) { return a *= s; }
    friend Poly operator*(Complex s, Poly a) { return a *= s; }
    friend Poly operator-(Poly a) { return a *= -1.0; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return {};
        std::vector<Complex> r(a.c_.size() + b.c_.size() - 1, Complex{});
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(r));
    }

    Poly pow(int n) const {
        Poly result = constant(1.0), base = *this;
        while (n > 0) {
            if (n & 1) result = result * base;
            n >>= 1;
            if (n) base = base * base;
        }
        return result;
    }

    /// p(q(z)) by Horner on polynomials.
    Poly compose(const Poly& q) const {
        Poly acc;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + constant(*it);
        return acc;
    }

    /// Quotient and remainder of division by (z - r).
    std::pair<Poly, Complex> deflate(Complex r) const {
        if (c_.size() <= 1) return {Poly{}, coeff(0)};
        std::vector<Complex> q(c_.size() - 1);
        Complex acc = c_.back();
        for (std::size_t k = c_.size() - 1; k-- > 0;) {
            q[k] = acc;
            acc = c_[k] + acc * r;
        }
        return {Poly(std::move(q)), acc};
    }

    friend bool operator==(const Poly&, const Poly&) = default;

private:
    void trim() {
        while (!c_.empty() && c_.back() == Complex{}) c_.pop_back();
    }

    std::vector<Complex> c_;
};

}  // namespace parabolic
