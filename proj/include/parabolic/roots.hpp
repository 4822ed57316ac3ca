#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "poly.hpp"

namespace parabolic {

struct Root {
    Complex value;
    int multiplicity = 1;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> single_linkage(const std::vector<Complex>& z,
                                                            const std::vector<std::size_t>& idx,
                                                            double rel_radius, double abs_radius) {
    const std::size_t n = idx.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const Complex za = z[idx[a]], zb = z[idx[b]];
            const double r = abs_radius + rel_radius * (1.0 + std::max(std::abs(za), std::abs(zb)));
            if (std::abs(za - zb) <= r) parent[find(a)] = find(b);
        }
    std::vector<std::vector<std::size_t>> groups;
    std::vector<long> slot(n, -1);
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t r = find(a);
        if (slot[r] < 0) {
            slot[r] = static_cast<long>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[r])].push_back(idx[a]);
    }
    return groups;
}

/// Tries to certify a cluster of m approximations as one root of multiplicity m.
inline bool certify_multiple(const Poly& p, const std::vector<Complex>& z, const std::vector<std::size_t>& cluster,
                             Complex& center) {
    const int m = static_cast<int>(cluster.size());
    std::vector<Poly> ders{p};
    for (int j = 1; j < m; ++j) ders.push_back(ders.back().derivative());
    Complex c{};
    for (auto k : cluster) c += z[k];
    c /= static_cast<double>(m);
    const Poly& q = ders.back();
    const Poly dq = q.derivative();
    for (int it = 0; it < 60; ++it) {
        const Complex d = dq(c);
        if (d == Complex{}) break;
        const Complex step = q(c) / d;
        c -= step;
        if (std::abs(step) <= 1e-17 * (1.0 + std::abs(c))) break;
    }
    for (int j = 0; j < m; ++j) {
        const double bound = 1e3 * ders[static_cast<std::size_t>(j)].horner_error_bound(c);
        if (std::abs(ders[static_cast<std::size_t>(j)](c)) > bound) return false;
    }
    center = c;
    return true;
}

}  // namespace detail

/// All roots of `p` with multiplicities (Aberth-Ehrlich iteration, Newton polish,
/// certified clustering of multiple roots, merge within `root_merge_tol`).
inline std::vector<Root> roots(const Poly& p, const NumericConfig& cfg = default_config()) {
    if (p.degree() < 1) throw Error(ErrorCode::InvalidArgument, "roots of a constant polynomial");
    std::vector<Root> out;

    int zeros = 0;
    while (p.coeff(zeros) == Complex{}) ++zeros;
    Poly q(std::vector<Complex>(p.coeffs().begin() + zeros, p.coeffs().end()));
    if (zeros > 0) out.push_back({Complex{}, zeros});
    const int n = q.degree();

    std::vector<Complex> z(static_cast<std::size_t>(n));
    if (n > 0) {
        const double radius = std::pow(std::abs(q.coeff(0) / q.leading()), 1.0 / n);
        for (int k = 0; k < n; ++k)
            z[static_cast<std::size_t>(k)] = std::polar(radius, 0.4 + 2.0 * pi * k / n);

        std::vector<bool> done(static_cast<std::size_t>(n), false);
        for (int it = 0; it < cfg.root_max_iter; ++it) {
            bool all = true;
            for (std::size_t i = 0; i < z.size(); ++i) {
                if (done[i]) continue;
                auto [v, dv] = q.eval_with_derivative(z[i]);
                if (v == Complex{}) {
                    done[i] = true;
                    continue;
                }
                Complex sum{};
                for (std::size_t j = 0; j < z.size(); ++j)
                    if (j != i) sum += 1.0 / (z[i] - z[j]);
                const Complex ratio = v / dv;
                const Complex w = ratio / (1.0 - ratio * sum);
                if (!is_finite(w)) continue;
                z[i] -= w;
                if (std::abs(w) <= 4e-16 * std::abs(z[i])) done[i] = true;
                else all = false;
            }
            if (all) break;
        }
        for (auto& r : z) {
            for (int it = 0; it < 3; ++it) {
                auto [v, dv] = q.eval_with_derivative(r);
                if (dv == Complex{}) break;
                const Complex cand = r - v / dv;
                if (std::abs(q(cand)) < std::abs(v)) r = cand;
                else break;
            }
        }

        // Certify multiple roots from coarse to fine cluster radii.
        std::vector<std::size_t> all_idx(z.size());
        std::iota(all_idx.begin(), all_idx.end(), 0);
        auto process = [&](auto&& self, const std::vector<std::size_t>& idx, double rel) -> void {
            for (const auto& g : detail::single_linkage(z, idx, rel, 0.0)) {
                if (g.size() == 1) {
                    out.push_back({z[g[0]], 1});
                    continue;
                }
                Complex c;
                if (detail::certify_multiple(q, z, g, c)) {
                    out.push_back({c, static_cast<int>(g.size())});
                } else if (rel > 1e-8) {
                    self(self, g, rel * 0.1);
                } else {
                    for (auto k : g) out.push_back({z[k], 1});
                }
            }
        };
        process(process, all_idx, 1e-2);
    }

    // Merge anything left within the merge tolerance.
    std::vector<Complex> vals;
    for (auto& r : out) vals.push_back(r.value);
    std::vector<std::size_t> idx(vals.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<Root> merged;
    for (const auto& g : detail::single_linkage(vals, idx, 0.0, cfg.root_merge_tol)) {
        Root r{Complex{}, 0};
        double wsum = 0.0;
        for (auto k : g) {
            r.value += out[k].value * static_cast<double>(out[k].multiplicity);
            wsum += out[k].multiplicity;
            r.multiplicity += out[k].multiplicity;
        }
        r.value /= wsum;
        merged.push_back(r);
    }

    const double scale = p.max_abs_coeff();
    double worst = 0.0;
    for (const auto& r : merged) worst = std::max(worst, std::abs(p(r.value)) / scale);
    if (!(worst <= cfg.root_residual_tol))
        throw Error(ErrorCode::NoConvergence, "root residual " + std::to_string(worst) + " after " +
                                                  std::to_string(cfg.root_max_iter) + " iterations");

    std::sort(merged.begin(), merged.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return merged;
}

}  // namespace parabolic
