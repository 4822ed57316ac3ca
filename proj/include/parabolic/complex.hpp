#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

namespace parabolic {

using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex I{0.0, 1.0};

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

/// Shortest round-trippable-ish rendering; always keeps a decimal point.
inline std::string format_real(double x) {
    if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", x);
    std::string s = buf;
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

inline std::string format_complex(Complex z) {
    const double scale = std::max(1.0, std::abs(z.real()));
    if (std::abs(z.imag()) <= 1e-15 * scale) return format_real(z.real());
    std::string s = format_real(z.real());
    s += z.imag() < 0 ? "-" : "+";
    s += format_real(std::abs(z.imag()));
    s += "i";
    return s;
}

}  // namespace parabolic
