#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"

namespace parabolic {

/// g = (g(1), ..., g(nu)); each entry is a gate index in 1..nu or Closed.
class GateVector {
public:
    static constexpr int closed = 0;

    GateVector() = default;
    explicit GateVector(std::vector<int> g) : g_(std::move(g)) {}

    /// Parses "(2,3,1,4,5)", "(2,1,*)" or "(Closed)".
    static GateVector parse(const std::string& text) {
        std::vector<int> g;
        std::string tok;
        auto flush = [&] {
            std::string t;
            for (char c : tok)
                if (!std::isspace(static_cast<unsigned char>(c))) t += c;
            tok.clear();
            if (t.empty()) throw Error(ErrorCode::InvalidArgument, "empty gate entry in '" + text + "'");
            if (t == "*" || t == "Closed" || t == "closed") {
                g.push_back(closed);
                return;
            }
            std::size_t used = 0;
            int v = 0;
            try {
                v = std::stoi(t, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != t.size() || v < 1) throw Error(ErrorCode::InvalidArgument, "bad gate entry '" + t + "'");
            g.push_back(v);
        };
        std::string body = text;
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.front()))) body.erase(body.begin());
        while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
        if (body.size() >= 2 && (body.front() == '(' || body.front() == '[') && (body.back() == ')' || body.back() == ']'))
            body = body.substr(1, body.size() - 2);
        for (char c : body) {
            if (c == ',') flush();
            else tok += c;
        }
        flush();
        return GateVector(std::move(g));
    }

    int nu() const { return static_cast<int>(g_.size()); }
    /// g(k) for k in 1..nu; `closed` for a closed gate.
    int operator()(int k) const { return g_.at(static_cast<std::size_t>(k - 1)); }
    bool is_closed(int k) const { return (*this)(k) == closed; }
    const std::vector<int>& entries() const { return g_; }

    bool bijective() const {
        std::vector<bool> seen(g_.size() + 1, false);
        for (int v : g_) {
            if (v < 1 || v > nu() || seen[static_cast<std::size_t>(v)]) return false;
            seen[static_cast<std::size_t>(v)] = true;
        }
        return true;
    }

    std::string to_string() const {
        if (g_.size() == 1 && g_[0] == closed) return "(Closed)";
        std::string s = "(";
        for (std::size_t k = 0; k < g_.size(); ++k) {
            if (k) s += ',';
            s += g_[k] == closed ? std::string("*") : std::to_string(g_[k]);
        }
        return s + ")";
    }

    friend bool operator==(const GateVector&, const GateVector&) = default;
    friend auto operator<=>(const GateVector&, const GateVector&) = default;

private:
    std::vector<int> g_;
};

/// Circle position of the endpoint (k,-) resp. (k,+), counted anticlockwise
/// from epsilon_{1,-} = 1 in steps of pi/nu.
constexpr int minus_position(int k) { return 2 * (k - 1); }
constexpr int plus_position(int k) { return 2 * (k - 1) + 1; }

namespace detail {

/// Chords (a,b) and (c,d) on a circle with 2*nu marked points cross iff
/// exactly one of c, d lies strictly inside the arc from a to b.
inline bool chords_cross(int a, int b, int c, int d) {
    auto inside = [&](int x) {
        if (a < b) return a < x && x < b;
        return x > a || x < b;
    };
    return inside(c) != inside(d);
}

}  // namespace detail

struct AdmissibilityReport {
    bool admissible = true;
    std::vector<std::string> violations;
};

/// Checks range, injectivity and that the chords from (k,+) to (g(k),-) do not cross.
inline AdmissibilityReport check_admissible(const GateVector& g) {
    AdmissibilityReport rep;
    auto bad = [&](std::string v) {
        rep.admissible = false;
        rep.violations.push_back(std::move(v));
    };
    const int nu = g.nu();
    if (nu < 1) bad("empty gate vector");
    std::vector<int> seen(static_cast<std::size_t>(nu) + 1, 0);
    for (int k = 1; k <= nu; ++k) {
        const int v = g(k);
        if (v == GateVector::closed) continue;
        if (v < 1 || v > nu) {
            bad("g(" + std::to_string(k) + ") = " + std::to_string(v) + " out of range");
            continue;
        }
        if (seen[static_cast<std::size_t>(v)])
            bad("g(" + std::to_string(seen[static_cast<std::size_t>(v)]) + ") = g(" + std::to_string(k) +
                ") = " + std::to_string(v));
        else seen[static_cast<std::size_t>(v)] = k;
    }
    for (int a = 1; a <= nu; ++a)
        for (int b = a + 1; b <= nu; ++b) {
            const int ga = g(a), gb = g(b);
            if (ga < 1 || gb < 1 || ga > nu || gb > nu || ga == gb) continue;
            if (detail::chords_cross(plus_position(a), minus_position(ga), plus_position(b), minus_position(gb)))
                bad("chords " + std::to_string(a) + " and " + std::to_string(b) + " cross");
        }
    return rep;
}

/// Every admissible gate vector of length nu, lexicographic with Closed before 1.
inline std::vector<GateVector> enumerate_admissible(int nu) {
    if (nu < 1 || nu > 8) throw Error(ErrorCode::InvalidArgument, "nu must be in 1..8");
    std::vector<GateVector> out;
    std::vector<int> g(static_cast<std::size_t>(nu), 0);
    std::vector<bool> used(static_cast<std::size_t>(nu) + 1, false);
    auto rec = [&](auto&& self, int k) -> void {
        if (k > nu) {
            out.emplace_back(g);
            return;
        }
        for (int v = 0; v <= nu; ++v) {
            if (v > 0) {
                if (used[static_cast<std::size_t>(v)]) continue;
                bool ok = true;
                for (int a = 1; a < k && ok; ++a) {
                    const int ga = g[static_cast<std::size_t>(a - 1)];
                    if (ga > 0 && detail::chords_cross(plus_position(a), minus_position(ga), plus_position(k),
                                                       minus_position(v)))
                        ok = false;
                }
                if (!ok) continue;
                used[static_cast<std::size_t>(v)] = true;
            }
            g[static_cast<std::size_t>(k - 1)] = v;
            self(self, k + 1);
            if (v > 0) used[static_cast<std::size_t>(v)] = false;
        }
        g[static_cast<std::size_t>(k - 1)] = 0;
    };
    rec(rec, 1);
    return out;
}

}  // namespace parabolic
