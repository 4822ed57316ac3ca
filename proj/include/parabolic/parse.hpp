#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <string_view>

#include "map.hpp"

namespace parabolic {

using Bindings = std::map<std::string, Complex, std::less<>>;

namespace detail {

struct Rational {
    Poly num = Poly::constant(0.0);
    Poly den = Poly::constant(1.0);

    bool is_constant() const { return num.degree() <= 0 && den.degree() == 0; }
    Complex constant_value() const { return num.coeff(0) / den.coeff(0); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        if (a.den == b.den) return {a.num + b.num, a.den};
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        if (a.den == b.den) return {a.num - b.num, a.den};
        return {a.num * b.den - b.num * a.den, a.den * b.den};
    }
    friend Rational operator*(const Rational& a, const Rational& b) { return {a.num * b.num, a.den * b.den}; }
};

class ExprParser {
public:
    ExprParser(std::string_view text, const Bindings& bindings, bool allow_z)
        : s_(text), bind_(bindings), allow_z_(allow_z) {}

    Rational parse() {
        Rational r = expr();
        skip_ws();
        if (pos_ < s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(1, static_cast<int>(pos_) + 1, msg); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Rational expr() {
        Rational r = term();
        for (;;) {
            if (accept('+')) r = r + term();
            else if (accept('-')) r = r - term();
            else return r;
        }
    }

    Rational term() {
        Rational r = unary();
        for (;;) {
            if (accept('*')) {
                r = r * unary();
            } else if (accept('/')) {
                const std::size_t at = pos_;
                Rational d = unary();
                if (d.num.is_zero()) {
                    pos_ = at;
                    fail("division by zero");
                }
                r = r * Rational{d.den, d.num};
            } else {
                return r;
            }
        }
    }

    Rational unary() {
        if (accept('-')) {
            Rational r = unary();
            return {-r.num, r.den};
        }
        if (accept('+')) return unary();
        return power();
    }

    Rational power() {
        Rational base = primary();
        if (!accept('^')) return base;
        skip_ws();
        const std::size_t at = pos_;
        Rational e = unary();
        if (!e.is_constant()) {
            pos_ = at;
            fail("exponent must be a constant");
        }
        const Complex ev = e.constant_value();
        if (base.is_constant()) {
            return constant(std::pow(base.constant_value(), ev));
        }
        const double n = ev.real();
        if (ev.imag() != 0.0 || n != std::round(n) || std::abs(n) > 4096) {
            pos_ = at;
            fail("exponent must be an integer");
        }
        const int k = static_cast<int>(n);
        if (k >= 0) return {base.num.pow(k), base.den.pow(k)};
        if (base.num.is_zero()) {
            pos_ = at;
            fail("negative power of zero");
        }
        return {base.den.pow(-k), base.num.pow(-k)};
    }

    static Rational constant(Complex c) { return {Poly::constant(c), Poly::constant(1.0)}; }

    Rational primary() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            Rational r = expr();
            if (!accept(')')) fail("expected ')'");
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Rational number() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
            if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
                pos_ = p;
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            }
        }
        const std::string tok(s_.substr(start, pos_ - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) {
            pos_ = start;
            fail("malformed number '" + tok + "'");
        }
        if (pos_ < s_.size() && s_[pos_] == 'i' &&
            !(pos_ + 1 < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '_'))) {
            ++pos_;
            return constant(Complex(0.0, v));
        }
        return constant(v);
    }

    Rational identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name(s_.substr(start, pos_ - start));
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            const std::size_t arg_at = pos_;
            Rational a = expr();
            if (!accept(')')) fail("expected ')'");
            if (!a.is_constant()) {
                pos_ = arg_at;
                fail("function '" + name + "' needs a constant argument");
            }
            const Complex x = a.constant_value();
            if (name == "exp") return constant(std::exp(x));
            if (name == "log") return constant(std::log(x));
            if (name == "sqrt") return constant(std::sqrt(x));
            if (name == "sin") return constant(std::sin(x));
            if (name == "cos") return constant(std::cos(x));
            pos_ = start;
            fail("unknown function '" + name + "'");
        }
        if (name == "z") {
            if (!allow_z_) {
                pos_ = start;
                fail("variable 'z' not allowed here");
            }
            return {Poly::identity(), Poly::constant(1.0)};
        }
        if (name == "i") return constant(I);
        if (auto it = bind_.find(name); it != bind_.end()) return constant(it->second);
        if (name == "pi") return constant(pi);
        pos_ = start;
        fail("unknown identifier '" + name + "'");
    }

    std::string_view s_;
    const Bindings& bind_;
    bool allow_z_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a map literal in the variable z, e.g. "z + z^4 + 0.01" or "(0.9+0i)*z + z^2".
/// Named parameters are substituted from `params`.
inline MapExpr parse_map(std::string_view text, const Bindings& params = {},
                         const NumericConfig& cfg = default_config()) {
    auto r = detail::ExprParser(text, params, true).parse();
    if (r.num.is_zero()) return MapExpr(Poly{}, Poly::constant(1.0), cfg);
    return MapExpr(r.num, r.den, cfg);
}

/// Parses a constant complex expression such as "1 - 1/n" or "-exp(i/n)".
inline Complex parse_scalar(std::string_view text, const Bindings& vars = {}) {
    auto r = detail::ExprParser(text, vars, false).parse();
    return r.constant_value();
}

}  // namespace parabolic
