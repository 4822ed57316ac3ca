#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gate_vector.hpp"
#include "tendency.hpp"

namespace parabolic {

enum class Orientation { PositiveCyclic, NegativeCyclic };
enum class SumTendency { PlusInf, MinusInf, Bounded, Indeterminate };

constexpr std::string_view to_string(SumTendency t) {
    switch (t) {
        case SumTendency::PlusInf: return "+inf";
        case SumTendency::MinusInf: return "-inf";
        case SumTendency::Bounded: return "bounded";
        case SumTendency::Indeterminate: return "indeterminate";
    }
    return "?";
}

/// Edge of the tree; its id is the gate index k of its chord.
struct TreeEdge {
    int gate = 0;
    int upper = 0;  ///< face to the left of the chord from (k,+) to (g(k),-)
    int lower = 0;

    int other(int v) const { return v == upper ? lower : upper; }
};

/// Dual tree of the chord diagram of a bijective admissible gate vector.
/// Vertices are the nu+1 faces, numbered by their first boundary arc; arc a
/// runs from circle position a to a+1.
class GateTree {
public:
    const GateVector& gates() const { return g_; }
    int nu() const { return g_.nu(); }
    int vertex_count() const { return static_cast<int>(orientation_.size()); }
    const std::vector<TreeEdge>& edges() const { return edges_; }
    const TreeEdge& edge(int k) const { return edges_.at(static_cast<std::size_t>(k - 1)); }
    Orientation orientation(int v) const { return orientation_.at(static_cast<std::size_t>(v)); }
    /// Gates of the edges at v in the cyclic order O(v).
    const std::vector<int>& incidence(int v) const { return incidence_.at(static_cast<std::size_t>(v)); }
    int valence(int v) const { return static_cast<int>(incidence(v).size()); }
    /// All vertices on the upper side of the edge of gate k.
    const std::vector<int>& upper_side(int k) const { return upper_side_.at(static_cast<std::size_t>(k - 1)); }
    int face_of_arc(int a) const {
        const int m = 2 * nu();
        return arc_face_.at(static_cast<std::size_t>(((a % m) + m) % m));
    }

    /// Successor gate in the walk: g(k) for sign +1, g(k) - 1 (mod nu) for sign -1.
    int next_gate(int k, int sign) const {
        const int j = g_(k);
        if (sign > 0) return j;
        return j == 1 ? nu() : j - 1;
    }

    /// Face shared by the chord of k and the chord of next_gate(k, sign).
    int junction(int k, int sign) const {
        const int q = minus_position(g_(k));
        return sign > 0 ? face_of_arc(q) : face_of_arc(q - 1);
    }

private:
    friend GateTree build_tree(const GateVector& g);

    GateVector g_;
    std::vector<int> arc_face_;
    std::vector<TreeEdge> edges_;
    std::vector<Orientation> orientation_;
    std::vector<std::vector<int>> incidence_;
    std::vector<std::vector<int>> upper_side_;
};

inline GateTree build_tree(const GateVector& g) {
    for (int k = 1; k <= g.nu(); ++k)
        if (g.is_closed(k)) throw Error(ErrorCode::ClosedGate, "gate " + std::to_string(k) + " is closed");
    const auto adm = check_admissible(g);
    if (!adm.admissible) {
        std::string msg = g.to_string();
        for (const auto& v : adm.violations) msg += "; " + v;
        throw Error(ErrorCode::NotAdmissible, msg);
    }
    const int nu = g.nu(), m = 2 * nu;
    std::vector<int> partner(static_cast<std::size_t>(m)), chord_at(static_cast<std::size_t>(m));
    for (int k = 1; k <= nu; ++k) {
        const int p = plus_position(k), q = minus_position(g(k));
        partner[static_cast<std::size_t>(p)] = q;
        partner[static_cast<std::size_t>(q)] = p;
        chord_at[static_cast<std::size_t>(p)] = chord_at[static_cast<std::size_t>(q)] = k;
    }
    std::vector<int> parent(static_cast<std::size_t>(m));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[static_cast<std::size_t>(a)] != a)
            a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
        return a;
    };
    for (int a = 0; a < m; ++a) {
        const int b = partner[static_cast<std::size_t>((a + 1) % m)];
        parent[static_cast<std::size_t>(find(a))] = find(b);
    }

    GateTree t;
    t.g_ = g;
    t.arc_face_.assign(static_cast<std::size_t>(m), -1);
    std::map<int, int> face_id;
    for (int a = 0; a < m; ++a) {
        const int r = find(a);
        auto [it, fresh] = face_id.try_emplace(r, static_cast<int>(face_id.size()));
        t.arc_face_[static_cast<std::size_t>(a)] = it->second;
    }
    const int nv = static_cast<int>(face_id.size());
    for (int k = 1; k <= nu; ++k) {
        const int p = plus_position(k);
        t.edges_.push_back({k, t.face_of_arc(p - 1), t.face_of_arc(p)});
    }
    t.orientation_.assign(static_cast<std::size_t>(nv), Orientation::NegativeCyclic);
    for (const auto& e : t.edges_) t.orientation_[static_cast<std::size_t>(e.upper)] = Orientation::PositiveCyclic;
    for (const auto& e : t.edges_)
        if (t.orientation_[static_cast<std::size_t>(e.lower)] != Orientation::NegativeCyclic)
            throw std::logic_error("inconsistent face orientation");
    t.incidence_.assign(static_cast<std::size_t>(nv), {});
    for (int a = 0; a < m; ++a)
        t.incidence_[static_cast<std::size_t>(t.arc_face_[static_cast<std::size_t>(a)])].push_back(
            chord_at[static_cast<std::size_t>((a + 1) % m)]);
    for (int v = 0; v < nv; ++v)
        if (t.orientation_[static_cast<std::size_t>(v)] == Orientation::NegativeCyclic)
            std::reverse(t.incidence_[static_cast<std::size_t>(v)].begin(), t.incidence_[static_cast<std::size_t>(v)].end());
    for (const auto& e : t.edges_) {
        std::vector<int> side{e.upper};
        std::vector<bool> seen(static_cast<std::size_t>(nv), false);
        seen[static_cast<std::size_t>(e.upper)] = seen[static_cast<std::size_t>(e.lower)] = true;
        for (std::size_t i = 0; i < side.size(); ++i)
            for (int k : t.incidence_[static_cast<std::size_t>(side[i])]) {
                const int u = t.edge(k).other(side[i]);
                if (seen[static_cast<std::size_t>(u)]) continue;
                seen[static_cast<std::size_t>(u)] = true;
                side.push_back(u);
            }
        std::sort(side.begin(), side.end());
        t.upper_side_.push_back(std::move(side));
    }
    return t;
}

/// Per-vertex tendencies of Re(index); the total over all vertices stays bounded,
/// so a +inf vertex requires a -inf vertex and vice versa.
class TendencyAssignment {
public:
    TendencyAssignment() = default;
    explicit TendencyAssignment(std::vector<Tendency> t) : t_(std::move(t)) {
        const bool plus = std::find(t_.begin(), t_.end(), Tendency::PlusInf) != t_.end();
        const bool minus = std::find(t_.begin(), t_.end(), Tendency::MinusInf) != t_.end();
        if (plus != minus) throw Error(ErrorCode::InvalidTendency, "divergent total: infinite tendencies of one sign only");
    }
    static TendencyAssignment parse(const std::string& symbols) {
        std::vector<Tendency> t;
        for (char c : symbols) {
            if (c == '+') t.push_back(Tendency::PlusInf);
            else if (c == '-') t.push_back(Tendency::MinusInf);
            else if (c == 'b') t.push_back(Tendency::Bounded);
            else if (c != ',' && c != ' ') throw Error(ErrorCode::InvalidArgument, std::string("bad tendency '") + c + "'");
        }
        return TendencyAssignment(std::move(t));
    }
    std::size_t size() const { return t_.size(); }
    Tendency operator[](int v) const { return t_.at(static_cast<std::size_t>(v)); }
    const std::vector<Tendency>& values() const { return t_; }

private:
    std::vector<Tendency> t_;
};

/// Classifies sum_v c_v h_v where h_v has tendency t[v] and sum_v h_v is bounded.
/// The sum is only known up to adding a multiple of the total, so it diverges to
/// +inf iff some threshold separates +inf vertices (above) from -inf ones (below).
inline SumTendency classify_weighted_sum(const TendencyAssignment& t, const std::vector<long>& c) {
    std::vector<long> plus, minus;
    for (std::size_t v = 0; v < c.size(); ++v) {
        if (t[static_cast<int>(v)] == Tendency::PlusInf) plus.push_back(c[v]);
        if (t[static_cast<int>(v)] == Tendency::MinusInf) minus.push_back(c[v]);
    }
    if (plus.empty()) return SumTendency::Bounded;
    const long pmin = *std::min_element(plus.begin(), plus.end()), pmax = *std::max_element(plus.begin(), plus.end());
    const long mmin = *std::min_element(minus.begin(), minus.end()), mmax = *std::max_element(minus.begin(), minus.end());
    if (pmin == pmax && mmin == mmax && pmin == mmin) return SumTendency::Bounded;
    if (mmax <= pmin) return SumTendency::PlusInf;
    if (pmax <= mmin) return SumTendency::MinusInf;
    return SumTendency::Indeterminate;
}

/// Tendency of the partial phase sum over the listed gates: each gate k
/// contributes the indices of all vertices on the upper side of its edge.
inline SumTendency tau_tendency(const GateTree& tree, const TendencyAssignment& t, const std::vector<int>& gates) {
    if (gates.empty()) throw Error(ErrorCode::InvalidArgument, "empty gate list");
    if (static_cast<int>(t.size()) != tree.vertex_count())
        throw Error(ErrorCode::InvalidArgument, "tendency assignment size does not match the tree");
    std::vector<long> c(static_cast<std::size_t>(tree.vertex_count()), 0);
    for (int k : gates) {
        if (k < 1 || k > tree.nu()) throw Error(ErrorCode::InvalidArgument, "gate " + std::to_string(k) + " out of range");
        for (int v : tree.upper_side(k)) ++c[static_cast<std::size_t>(v)];
    }
    return classify_weighted_sum(t, c);
}

struct OudkerkOutcome {
    bool finite = true;
    int length = 0;     ///< Finite(r)
    int preperiod = 0;  ///< Infinite(m, p, v)
    int period = 0;
    int center = -1;
};

struct OudkerkRun {
    int start_gate = 0;
    std::vector<int> sequence;  ///< a_1, a_2, ... up to the first repetition
    std::vector<int> signs;     ///< s_1, s_2, ... (+1 or -1)
    OudkerkOutcome outcome;
};

class IndeterminateSumError : public Error {
public:
    IndeterminateSumError(int start_gate, std::vector<int> prefix)
        : Error(ErrorCode::IndeterminateSum, describe(start_gate, prefix)), start_gate_(start_gate),
          prefix_(std::move(prefix)) {}
    int start_gate() const noexcept { return start_gate_; }
    const std::vector<int>& prefix() const noexcept { return prefix_; }

private:
    static std::string describe(int k, const std::vector<int>& p) {
        std::string s = "start gate " + std::to_string(k) + ", prefix (";
        for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
        return s + ")";
    }
    int start_gate_;
    std::vector<int> prefix_;
};

/// Optional numeric tie-breaker for sums the three-valued data cannot decide.
/// Receives the per-vertex coefficients of the partial sum.
using SumResolver = std::function<std::optional<Tendency>(const std::vector<long>&)>;

inline OudkerkRun run_oudkerk(const GateTree& tree, const TendencyAssignment& t, int k,
                              const SumResolver& resolver = {}) {
    if (k < 1 || k > tree.nu()) throw Error(ErrorCode::InvalidArgument, "gate " + std::to_string(k) + " out of range");
    if (static_cast<int>(t.size()) != tree.vertex_count())
        throw Error(ErrorCode::InvalidArgument, "tendency assignment size does not match the tree");
    OudkerkRun run;
    run.start_gate = k;
    const std::size_t nv = static_cast<std::size_t>(tree.vertex_count());
    std::vector<long> c(nv, 0);
    std::map<std::pair<int, std::vector<long>>, int> seen;
    int a = k;
    for (int r = 1;; ++r) {
        run.sequence.push_back(a);
        for (int v : tree.upper_side(a)) ++c[static_cast<std::size_t>(v)];
        SumTendency s = classify_weighted_sum(t, c);
        if (s == SumTendency::Indeterminate) {
            std::optional<Tendency> decided = resolver ? resolver(c) : std::nullopt;
            if (!decided) throw IndeterminateSumError(k, run.sequence);
            s = *decided == Tendency::PlusInf ? SumTendency::PlusInf
                : *decided == Tendency::MinusInf ? SumTendency::MinusInf
                                                 : SumTendency::Bounded;
        }
        if (s == SumTendency::Bounded) {
            run.outcome = {true, r, 0, 0, -1};
            return run;
        }
        const int sign = s == SumTendency::PlusInf ? 1 : -1;
        run.signs.push_back(sign);

        // Order type of c up to shifts, with gaps capped at 2, fixes all future classifications.
        std::vector<std::size_t> order(nv);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return c[x] < c[y]; });
        std::vector<long> key(nv, 0);
        long level = 0;
        for (std::size_t i = 1; i < nv; ++i) {
            level += std::min<long>(2, c[order[i]] - c[order[i - 1]]);
            key[order[i]] = level;
        }
        auto [it, fresh] = seen.try_emplace({a, key}, r);
        if (!fresh) {
            const int r0 = it->second, len = r - r0;
            auto at = [&](int j) {  // a_j, 1-based, extended periodically beyond r
                while (j > r) j -= len;
                return run.sequence[static_cast<std::size_t>(j - 1)];
            };
            int p = len;
            for (int d = 1; d < len; ++d) {
                if (len % d) continue;
                bool ok = true;
                for (int j = r0; j < r0 + len && ok; ++j) ok = at(j) == at(j + d);
                if (ok) {
                    p = d;
                    break;
                }
            }
            int m = 0;
            for (int j = r0 - 1; j >= 1; --j)
                if (at(j) != at(j + p)) {
                    m = j;
                    break;
                }
            run.sequence.pop_back();
            run.signs.pop_back();
            const int sm = run.signs[static_cast<std::size_t>(m)];
            run.outcome = {false, 0, m, p, tree.junction(at(m + 1), sm)};
            return run;
        }
        a = tree.next_gate(a, sign);
        if (r > 1000000) throw std::logic_error("oudkerk walk failed to cycle");
    }
}

enum class MarkMode { AttractingCenter, RepellingCenter };

/// Marked edge set E_* (as gate indices) for the centre v0 and vertex set V_*.
inline std::set<int> mark_edges(const GateTree& tree, int v0, const std::set<int>& vstar, MarkMode mode) {
    const int nv = tree.vertex_count();
    if (v0 < 0 || v0 >= nv) throw Error(ErrorCode::InvalidArgument, "vertex out of range");
    if (vstar.empty()) throw Error(ErrorCode::InvalidArgument, "empty vertex set");
    for (int v : vstar)
        if (v < 0 || v >= nv) throw Error(ErrorCode::InvalidArgument, "vertex out of range");
    if (vstar.count(v0)) throw Error(ErrorCode::InvalidCenter, "centre vertex belongs to the marked set");

    // Root the tree at v0.
    std::vector<int> parent_edge(static_cast<std::size_t>(nv), 0), order{v0};
    std::vector<bool> visited(static_cast<std::size_t>(nv), false);
    visited[static_cast<std::size_t>(v0)] = true;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const int v = order[i];
        for (int k : tree.incidence(v)) {
            const int u = tree.edge(k).other(v);
            if (visited[static_cast<std::size_t>(u)]) continue;
            visited[static_cast<std::size_t>(u)] = true;
            parent_edge[static_cast<std::size_t>(u)] = k;
            order.push_back(u);
        }
    }
    std::vector<bool> meets(static_cast<std::size_t>(nv), false);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const int v = *it;
        if (vstar.count(v)) meets[static_cast<std::size_t>(v)] = true;
        if (v != v0 && meets[static_cast<std::size_t>(v)])
            meets[static_cast<std::size_t>(tree.edge(parent_edge[static_cast<std::size_t>(v)]).other(v))] = true;
    }

    std::set<int> marked;
    if (mode == MarkMode::RepellingCenter) {
        for (int v : vstar) marked.insert(parent_edge[static_cast<std::size_t>(v)]);
        return marked;
    }

    // Child edges of v leading to subtrees that meet V_*, in O(v) order after the parent edge.
    auto relevant_children = [&](int v) {
        const auto& inc = tree.incidence(v);
        std::size_t start = 0;
        if (v != v0) {
            const auto pos = std::find(inc.begin(), inc.end(), parent_edge[static_cast<std::size_t>(v)]);
            start = static_cast<std::size_t>(pos - inc.begin()) + 1;
        }
        std::vector<int> out;
        for (std::size_t i = 0; i < inc.size(); ++i) {
            const int k = inc[(start + i) % inc.size()];
            if (v != v0 && k == parent_edge[static_cast<std::size_t>(v)]) continue;
            if (meets[static_cast<std::size_t>(tree.edge(k).other(v))]) out.push_back(k);
        }
        return out;
    };
    auto descend = [&](auto&& self, int v) -> void {
        while (!vstar.count(v) && tree.valence(v) == 2) {
            const auto kids = relevant_children(v);
            if (kids.empty()) return;
            v = tree.edge(kids.front()).other(v);
        }
        const auto kids = relevant_children(v);
        const bool in_vstar = vstar.count(v) > 0;
        for (std::size_t i = in_vstar ? 0 : 1; i < kids.size(); ++i) marked.insert(kids[i]);
        for (int k : kids) self(self, tree.edge(k).other(v));
    };
    for (int k : relevant_children(v0)) {
        marked.insert(k);
        descend(descend, tree.edge(k).other(v0));
    }
    return marked;
}

struct ConvergencePrediction {
    std::vector<OudkerkRun> runs;  ///< runs[k-1] starts at gate k
    std::set<int> avoided;
    std::set<int> invaded;
    int ell = 0;
    bool julia_converges = false;
    std::vector<bool> ray_uniform;  ///< ray_uniform[k-1]
};

inline ConvergencePrediction predict(const GateTree& tree, const TendencyAssignment& t,
                                     const SumResolver& resolver = {}) {
    ConvergencePrediction out;
    for (int k = 1; k <= tree.nu(); ++k) {
        out.runs.push_back(run_oudkerk(tree, t, k, resolver));
        const bool infinite = !out.runs.back().outcome.finite;
        (infinite ? out.avoided : out.invaded).insert(k);
        out.ray_uniform.push_back(infinite);
    }
    out.ell = static_cast<int>(out.avoided.size());
    out.julia_converges = out.ell == tree.nu();
    return out;
}

inline std::string to_text(const OudkerkRun& run) {
    std::ostringstream os;
    os << "run k=" << run.start_gate << " outcome=";
    if (run.outcome.finite) os << "finite " << run.outcome.length;
    else os << "infinite " << run.outcome.preperiod << ' ' << run.outcome.period << ' ' << run.outcome.center;
    return os.str();
}

inline void write_tree(std::ostream& os, const GateTree& tree, const TendencyAssignment* t = nullptr) {
    for (int v = 0; v < tree.vertex_count(); ++v)
        os << "vertex " << v << " orientation " << (tree.orientation(v) == Orientation::PositiveCyclic ? 'P' : 'N')
           << " tendency " << (t ? tendency_symbol((*t)[v]) : 'b') << '\n';
    for (const auto& e : tree.edges()) os << "edge " << e.gate << ' ' << e.upper << ' ' << e.lower << " gate " << e.gate << '\n';
}

inline void write_prediction(std::ostream& os, const ConvergencePrediction& p) {
    for (const auto& r : p.runs) os << to_text(r) << '\n';
    os << "avoided = {";
    bool first = true;
    for (int k : p.avoided) os << (std::exchange(first, false) ? "" : ",") << k;
    os << "}\nell = " << p.ell << "\njulia_converges = " << (p.julia_converges ? "true" : "false") << '\n';
}

}  // namespace parabolic
