#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "map.hpp"
#include "tendency.hpp"

namespace parabolic {

enum class SplitClass { Star, Balanced, Leaned, Degenerate, Mixed };

constexpr std::string_view to_string(SplitClass c) {
    switch (c) {
        case SplitClass::Star: return "Star";
        case SplitClass::Balanced: return "Balanced";
        case SplitClass::Leaned: return "Leaned";
        case SplitClass::Degenerate: return "Degenerate";
        case SplitClass::Mixed: return "Mixed";
    }
    return "?";
}

struct FixedPointRecord {
    Complex point;
    int multiplicity = 1;
    Complex multiplier;
    Complex index;
    std::optional<double> horo_stat;

    bool is_attracting() const { return std::abs(multiplier) < 1.0; }
    bool is_repelling() const { return std::abs(multiplier) > 1.0; }
};

struct SplittingReport {
    Complex center;
    double radius = 0.0;
    int period = 1;
    int multiplicity = 0;  ///< total count with multiplicity, i.e. nu + 1
    std::vector<FixedPointRecord> points;
    SplitClass classification = SplitClass::Mixed;

    int nu() const { return multiplicity - 1; }
};

/// Re(1/(1 - lambda)).
inline double horocyclic_statistic(Complex multiplier, const NumericConfig& cfg = default_config()) {
    if (std::abs(1.0 - multiplier) < cfg.at_parabolic_tol)
        throw Error(ErrorCode::AtParabolic, "multiplier " + format_complex(multiplier) + " is parabolic");
    return (1.0 / (1.0 - multiplier)).real();
}

namespace detail {

inline Complex index_on_circle(const MapExpr& f, int l, Complex center, double radius, const NumericConfig& cfg) {
    auto term = [&](double theta) {
        const Complex w = std::polar(radius, theta);
        const Complex z = center + w;
        const Complex gap = z - iterate(f, z, l, cfg);
        if (std::abs(gap) < cfg.fp_on_contour_tol)
            throw Error(ErrorCode::FixedPointOnContour, "fixed point on contour near " + format_complex(z));
        return w / gap;
    };
    int n = cfg.quad_nodes_initial;
    Complex sum{};
    for (int j = 0; j < n; ++j) sum += term(2.0 * pi * j / n);
    Complex est = sum / static_cast<double>(n);
    while (n < cfg.quad_nodes_max) {
        Complex odd{};
        for (int j = 0; j < n; ++j) odd += term(2.0 * pi * (j + 0.5) / n);
        sum += odd;
        n *= 2;
        const Complex next = sum / static_cast<double>(n);
        const bool ok = std::abs(next - est) < cfg.quad_tol * std::max(1.0, std::abs(next));
        est = next;
        if (ok) return est;
    }
    throw Error(ErrorCode::NoQuadConvergence,
                "trapezoid rule unconverged at " + std::to_string(cfg.quad_nodes_max) + " nodes");
}

inline double default_contour_radius(const std::vector<Root>& fps, Complex sigma, const NumericConfig& cfg) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& r : fps) {
        const double d = std::abs(r.value - sigma);
        if (d > cfg.root_merge_tol * (1.0 + std::abs(sigma))) nearest = std::min(nearest, d);
    }
    if (!std::isfinite(nearest)) return 1.0;
    return std::max(nearest / 2.0, cfg.min_contour_radius);
}

}  // namespace detail

/// Holomorphic fixed-point index of f^l at sigma: (1/2 pi i) times the contour
/// integral of dz / (z - f^l(z)) over a circle around sigma.
inline Complex holomorphic_index(const MapExpr& f, int l, Complex sigma, std::optional<double> radius = std::nullopt,
                                 const NumericConfig& cfg = default_config()) {
    double r = 0.0;
    if (radius) {
        r = *radius;
    } else {
        r = detail::default_contour_radius(roots(fixed_point_poly(f, l, cfg), cfg), sigma, cfg);
    }
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "contour radius must be positive");
    return detail::index_on_circle(f, l, sigma, r, cfg);
}

inline SplitClass classify_splitting(const std::vector<FixedPointRecord>& pts,
                                     const NumericConfig& cfg = default_config()) {
    int total = 0, attracting = 0, repelling = 0;
    for (const auto& p : pts) {
        if (p.multiplicity > 1 || std::abs(p.multiplier - 1.0) < cfg.degenerate_tol) return SplitClass::Degenerate;
        ++total;
        if (p.is_attracting()) ++attracting;
        if (p.is_repelling()) ++repelling;
    }
    const int nu = total - 1;
    if ((attracting == 1 && total - attracting == nu) || (repelling == 1 && total - repelling == nu))
        return SplitClass::Star;
    if (attracting >= 2 && repelling >= 2) return SplitClass::Balanced;
    if (attracting == 0 || repelling == 0) return SplitClass::Leaned;
    return SplitClass::Mixed;
}

/// Fixed points of f^l inside the disk |z - center| < radius, with multipliers,
/// indices and horocyclic statistics.
inline SplittingReport split_fixed_points(const MapExpr& f, Complex center, double radius, int l = 1,
                                          const NumericConfig& cfg = default_config()) {
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "radius must be positive");
    const auto fps = roots(fixed_point_poly(f, l, cfg), cfg);
    SplittingReport rep;
    rep.center = center;
    rep.radius = radius;
    rep.period = l;
    for (const auto& r : fps) {
        const double d = std::abs(r.value - center);
        if (std::abs(d - radius) < cfg.boundary_root_tol)
            throw Error(ErrorCode::BoundaryRoot, "fixed point " + format_complex(r.value) + " on disk boundary");
        if (d > radius) continue;
        FixedPointRecord rec;
        rec.point = r.value;
        rec.multiplicity = r.multiplicity;
        rec.multiplier = cycle_multiplier(f, r.value, l, cfg);
        rec.index = detail::index_on_circle(f, l, r.value, detail::default_contour_radius(fps, r.value, cfg), cfg);
        if (r.multiplicity == 1 && std::abs(1.0 - rec.multiplier) >= cfg.at_parabolic_tol)
            rec.horo_stat = horocyclic_statistic(rec.multiplier, cfg);
        rep.multiplicity += r.multiplicity;
        rep.points.push_back(rec);
    }
    rep.classification = classify_splitting(rep.points, cfg);
    return rep;
}

inline void write_csv(std::ostream& os, const SplittingReport& rep) {
    os << "n,point_re,point_im,mult_re,mult_im,index_re,index_im,horo_stat,class\n";
    for (std::size_t k = 0; k < rep.points.size(); ++k) {
        const auto& p = rep.points[k];
        os << k << ',' << format_real(p.point.real()) << ',' << format_real(p.point.imag()) << ','
           << format_real(p.multiplier.real()) << ',' << format_real(p.multiplier.imag()) << ','
           << format_real(p.index.real()) << ',' << format_real(p.index.imag()) << ','
           << (p.horo_stat ? format_real(*p.horo_stat) : std::string("nan")) << ',' << to_string(rep.classification)
           << '\n';
    }
}

struct TrackVerdict {
    std::vector<Complex> points;  ///< one per report
    std::vector<double> horo;     ///< one per report
    Tendency verdict = Tendency::Bounded;
};

struct HoroVerdict {
    std::vector<TrackVerdict> tracks;  ///< in the order of the first report's points
    std::optional<std::size_t> distinguished;
    int ell = 0;
};

/// Follows every fixed point along a parameter sequence and decides whether
/// its horocyclic statistic diverges or stays bounded.
/// Divergent when |x| is monotone over the last half of the series and ends
/// beyond the divergence threshold; bounded when the last half stays within
/// the bounded threshold; empty otherwise.
inline std::optional<Tendency> classify_series(const std::vector<double>& x, const NumericConfig& cfg = default_config()) {
    if (x.empty()) return std::nullopt;
    const std::size_t n = x.size(), start = n / 2;
    bool monotone = true;
    double mx = 0.0;
    for (std::size_t s = start; s < n; ++s) {
        mx = std::max(mx, std::abs(x[s]));
        if (s > start && std::abs(x[s]) < std::abs(x[s - 1]) * (1.0 - 1e-12)) monotone = false;
    }
    if (monotone && std::abs(x.back()) > cfg.divergence_threshold) return x.back() > 0 ? Tendency::PlusInf : Tendency::MinusInf;
    if (mx <= cfg.bounded_threshold) return Tendency::Bounded;
    return std::nullopt;
}

inline HoroVerdict classify_horocyclic(const std::vector<SplittingReport>& reports,
                                       const NumericConfig& cfg = default_config()) {
    if (reports.empty()) throw Error(ErrorCode::InvalidArgument, "empty report sequence");
    HoroVerdict out;
    const std::size_t m = reports.front().points.size();
    for (const auto& p : reports.front().points) out.tracks.push_back({{p.point}, {}, Tendency::Bounded});
    std::vector<std::size_t> current(m);
    for (std::size_t k = 0; k < m; ++k) current[k] = k;
    std::vector<std::vector<std::size_t>> member(reports.size(), std::vector<std::size_t>(m));
    member[0] = current;
    for (std::size_t s = 1; s < reports.size(); ++s) {
        const auto& prev = reports[s - 1].points;
        const auto& next = reports[s].points;
        if (next.size() != m)
            throw Error(ErrorCode::TrackMatchFailure, "report " + std::to_string(s) + " has " +
                                                          std::to_string(next.size()) + " points, expected " +
                                                          std::to_string(m));
        // greedy global nearest-neighbour pairing
        struct Pair {
            double d;
            std::size_t t, j;
        };
        std::vector<Pair> pairs;
        for (std::size_t t = 0; t < m; ++t)
            for (std::size_t j = 0; j < m; ++j)
                pairs.push_back({std::abs(prev[member[s - 1][t]].point - next[j].point), t, j});
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
        std::vector<bool> used_t(m, false), used_j(m, false);
        std::size_t assigned = 0;
        for (const auto& p : pairs) {
            if (used_t[p.t] || used_j[p.j]) continue;
            used_t[p.t] = used_j[p.j] = true;
            member[s][p.t] = p.j;
            ++assigned;
        }
        if (assigned != m) throw Error(ErrorCode::TrackMatchFailure, "could not pair points");
    }
    for (std::size_t t = 0; t < m; ++t) {
        auto& tr = out.tracks[t];
        tr.points.clear();
        for (std::size_t s = 0; s < reports.size(); ++s) {
            const auto& rec = reports[s].points[member[s][t]];
            if (!rec.horo_stat)
                throw Error(ErrorCode::AmbiguousTrack, "track " + std::to_string(t) + " passes a parabolic point");
            tr.points.push_back(rec.point);
            tr.horo.push_back(*rec.horo_stat);
        }
        const auto verdict = classify_series(tr.horo, cfg);
        if (!verdict) {
            std::ostringstream msg;
            msg << "track " << t << " neither diverges nor stays bounded (final " << tr.horo.back() << ")";
            throw Error(ErrorCode::AmbiguousTrack, msg.str());
        }
        tr.verdict = *verdict;
    }
    const auto& last = reports.back();
    if (last.classification == SplitClass::Star) {
        std::vector<std::size_t> att, rep;
        for (std::size_t t = 0; t < m; ++t) {
            const auto& rec = last.points[member.back()[t]];
            if (rec.is_attracting()) att.push_back(t);
            if (rec.is_repelling()) rep.push_back(t);
        }
        out.distinguished = att.size() == 1 ? att[0] : rep[0];
    }
    for (std::size_t t = 0; t < m; ++t)
        if (out.tracks[t].verdict != Tendency::Bounded && out.distinguished != t) ++out.ell;
    return out;
}

}  // namespace parabolic
