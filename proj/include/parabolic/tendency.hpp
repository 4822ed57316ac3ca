#pragma once

#include <string_view>

namespace parabolic {

/// Asymptotic behaviour of a real sequence along a parameter sequence.
enum class Tendency { PlusInf, MinusInf, Bounded };

constexpr std::string_view to_string(Tendency t) {
    switch (t) {
        case Tendency::PlusInf: return "+inf";
        case Tendency::MinusInf: return "-inf";
        case Tendency::Bounded: return "bounded";
    }
    return "?";
}

constexpr char tendency_symbol(Tendency t) {
    switch (t) {
        case Tendency::PlusInf: return '+';
        case Tendency::MinusInf: return '-';
        case Tendency::Bounded: return 'b';
    }
    return '?';
}

}  // namespace parabolic
