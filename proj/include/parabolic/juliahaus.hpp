#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "map.hpp"
#include "parallel.hpp"

namespace parabolic {

struct GridSpec {
    Complex center{};
    double half_width = 2.0;
    int resolution = 1024;

    void validate() const {
        if (!(half_width > 0.0) || !is_finite(center))
            throw Error(ErrorCode::InvalidArgument, "grid half width must be positive");
        if (resolution < 64 || resolution > 8192 || (resolution & (resolution - 1)) != 0)
            throw Error(ErrorCode::InvalidArgument, "grid resolution must be a power of two in [64, 8192]");
    }
    double cell_size() const { return 2.0 * half_width / resolution; }
    /// Sample point of cell (row, col); row 0 is the top edge of the window.
    /// The lattice contains `center` itself, so a window centered on the real
    /// axis samples the axis exactly.
    Complex cell_center(int row, int col) const {
        const double cs = cell_size();
        const int h = resolution / 2;
        return center + Complex((col - h) * cs, (h - row) * cs);
    }
};

struct PointCloud {
    std::vector<Complex> points;
    double cell_size = 0.0;
};

/// Boundary cells of the escaping set on a grid.
struct BoundaryMask {
    GridSpec grid;
    std::vector<std::uint8_t> cells;  ///< row-major, 1 = boundary

    PointCloud cloud() const {
        PointCloud pc;
        pc.cell_size = grid.cell_size();
        for (int r = 0; r < grid.resolution; ++r)
            for (int c = 0; c < grid.resolution; ++c)
                if (cells[static_cast<std::size_t>(r) * grid.resolution + c]) pc.points.push_back(grid.cell_center(r, c));
        return pc;
    }
};

/// Smallest radius beyond which every orbit of `p` escapes.
inline double default_escape_radius(const Poly& p) {
    const Complex lead = p.leading();
    double s = 0.0;
    for (int k = 0; k < p.degree(); ++k) s += std::abs(p.coeff(k));
    return std::max(2.0, (1.0 + s) / std::min(1.0, std::abs(lead)));
}

/// Escape-time classification plus a distance estimate: a cell is on the
/// boundary when its 4-neighborhood mixes escaping and bounded centers, or when
/// its center escapes but the distance estimate |z| log|z| / |dz| puts the
/// Julia set within half a cell. The second test catches Cantor dust, which has
/// no bounded cell centers at all.
inline BoundaryMask julia_boundary_mask(const MapExpr& f, const GridSpec& grid, int max_iter,
                                        double escape_radius = 0.0) {
    grid.validate();
    if (!f.is_polynomial() || f.degree() < 2)
        throw Error(ErrorCode::InvalidArgument, "Julia sets need a polynomial of degree >= 2");
    if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be positive");
    const Poly p = f.as_poly();
    const double needed = default_escape_radius(p);
    if (escape_radius == 0.0) escape_radius = std::max(needed, 1e3);
    if (escape_radius < needed)
        throw Error(ErrorCode::InvalidArgument, "escape radius below the certified bound " + format_real(needed));

    const int n = grid.resolution;
    const double half_cell = 0.5 * grid.cell_size();
    std::vector<std::uint8_t> escaped(static_cast<std::size_t>(n) * n), close(escaped.size());
    // plain real arithmetic: std::complex products carry NaN recovery that
    // dominates this loop
    const int deg = p.degree();
    std::vector<double> cr(static_cast<std::size_t>(deg) + 1), ci(cr.size());
    for (int k = 0; k <= deg; ++k) {
        cr[static_cast<std::size_t>(k)] = p.coeff(k).real();
        ci[static_cast<std::size_t>(k)] = p.coeff(k).imag();
    }
    const double r2 = escape_radius * escape_radius;
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
        for (int col = 0; col < n; ++col) {
            const Complex start = grid.cell_center(static_cast<int>(row), col);
            double x = start.real(), y = start.imag(), dx = 1.0, dy = 0.0;
            const std::size_t at = row * n + col;
            for (int j = 0; j < max_iter; ++j) {
                // Horner for p and p' together
                double px = cr[deg], py = ci[deg], qx = 0.0, qy = 0.0;
                for (int k = deg - 1; k >= 0; --k) {
                    const double tx = qx * x - qy * y + px, ty = qx * y + qy * x + py;
                    qx = tx;
                    qy = ty;
                    const double ux = px * x - py * y + cr[k], uy = px * y + py * x + ci[k];
                    px = ux;
                    py = uy;
                }
                const double ndx = qx * dx - qy * dy, ndy = qx * dy + qy * dx;
                dx = ndx;
                dy = ndy;
                x = px;
                y = py;
                if (x * x + y * y > r2) {
                    const double az = std::hypot(x, y), adz = std::hypot(dx, dy);
                    escaped[at] = 1;
                    close[at] = !std::isfinite(adz) || az * std::log(az) < half_cell * adz;
                    break;
                }
            }
        }
    });

    BoundaryMask mask{grid, std::vector<std::uint8_t>(escaped.size())};
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t at = static_cast<std::size_t>(r) * n + c;
            bool mixed = false;
            const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
            for (int k = 0; k < 4 && !mixed; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || rr >= n || cc < 0 || cc >= n) continue;
                mixed = escaped[static_cast<std::size_t>(rr) * n + cc] != escaped[at];
            }
            mask.cells[at] = mixed || close[at];
        }
    return mask;
}

inline PointCloud julia_boundary(const MapExpr& f, const GridSpec& grid, int max_iter, double escape_radius = 0.0) {
    auto pc = julia_boundary_mask(f, grid, max_iter, escape_radius).cloud();
    if (pc.points.empty()) throw Error(ErrorCode::EmptyWindow, "no boundary cell in the grid window");
    return pc;
}

/// Uniform bucket grid for exact nearest-neighbor queries.
class NearestIndex {
public:
    explicit NearestIndex(const std::vector<Complex>& pts) : pts_(pts) {
        if (pts_.empty()) throw Error(ErrorCode::EmptyCloud, "empty point cloud");
        double x0 = pts_[0].real(), x1 = x0, y0 = pts_[0].imag(), y1 = y0;
        for (Complex p : pts_) {
            x0 = std::min(x0, p.real());
            x1 = std::max(x1, p.real());
            y0 = std::min(y0, p.imag());
            y1 = std::max(y1, p.imag());
        }
        lo_ = Complex(x0, y0);
        const double extent = std::max({x1 - x0, y1 - y0, 1e-300});
        side_ = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(pts_.size()))), 1, 4096);
        h_ = extent / side_ * (1.0 + 1e-12);
        if (!(h_ > 0.0)) h_ = 1.0;
        nx_ = std::clamp(static_cast<int>((x1 - x0) / h_) + 1, 1, side_ + 1);
        ny_ = std::clamp(static_cast<int>((y1 - y0) / h_) + 1, 1, side_ + 1);
        start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        for (Complex p : pts_) ++start_[bucket(p) + 1];
        for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
        order_.resize(pts_.size());
        auto fill = start_;
        for (std::size_t i = 0; i < pts_.size(); ++i) order_[fill[bucket(pts_[i])]++] = i;
    }

    double nearest_distance(Complex q) const {
        const int cx = cell_x(q.real()), cy = cell_y(q.imag());
        double best = std::numeric_limits<double>::infinity();
        const int max_ring = std::max(nx_, ny_);
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (ring >= 1 && (ring - 1) * h_ > best) break;
            for (int ix = cx - ring; ix <= cx + ring; ++ix) {
                if (ix < 0 || ix >= nx_) continue;
                const bool edge_col = ix == cx - ring || ix == cx + ring;
                for (int iy = cy - ring; iy <= cy + ring; iy += edge_col ? 1 : 2 * std::max(ring, 1)) {
                    if (iy < 0 || iy >= ny_) continue;
                    const std::size_t b = static_cast<std::size_t>(iy) * nx_ + ix;
                    for (std::size_t k = start_[b]; k < start_[b + 1]; ++k)
                        best = std::min(best, std::abs(pts_[order_[k]] - q));
                }
            }
        }
        return best;
    }

private:
    int cell_x(double x) const { return std::clamp(static_cast<int>(std::floor((x - lo_.real()) / h_)), 0, nx_ - 1); }
    int cell_y(double y) const { return std::clamp(static_cast<int>(std::floor((y - lo_.imag()) / h_)), 0, ny_ - 1); }
    std::size_t bucket(Complex p) const { return static_cast<std::size_t>(cell_y(p.imag())) * nx_ + cell_x(p.real()); }

    const std::vector<Complex>& pts_;
    Complex lo_;
    double h_ = 1.0;
    int side_ = 1, nx_ = 1, ny_ = 1;
    std::vector<std::size_t> start_, order_;
};

/// sup over a of the distance from a to b.
inline double directed_hausdorff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyCloud, "empty point cloud");
    const NearestIndex index(b);
    const std::size_t chunk = 4096, chunks = (a.size() + chunk - 1) / chunk;
    std::vector<double> part(chunks, 0.0);
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t end = std::min(a.size(), (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) part[c] = std::max(part[c], index.nearest_distance(a[i]));
    });
    return *std::max_element(part.begin(), part.end());
}

inline double hausdorff(const PointCloud& a, const PointCloud& b) {
    return std::max(directed_hausdorff(a.points, b.points), directed_hausdorff(b.points, a.points));
}

inline double distance_to(const PointCloud& cloud, Complex p) { return NearestIndex(cloud.points).nearest_distance(p); }

struct SweepRow {
    Complex param;
    double dH = 0.0;
    double dH_cells = 0.0;
    double deficiency = 0.0;  ///< sup over the reference cloud of the distance to this cloud
    std::vector<double> probes;
};

struct SweepTable {
    double cell_size = 0.0;
    double reference_probe_floor = 0.0;
    std::vector<double> reference_probes;  ///< probe distances to the reference cloud
    std::vector<SweepRow> rows;
};

using FamilyBuilder = std::function<MapExpr(Complex)>;

inline SweepTable convergence_sweep(const FamilyBuilder& family, const std::vector<Complex>& params,
                                    Complex reference_param, const GridSpec& grid, int max_iter,
                                    const std::vector<Complex>& probes = {}) {
    SweepTable table;
    table.cell_size = grid.cell_size();
    const PointCloud ref = julia_boundary(family(reference_param), grid, max_iter);
    const NearestIndex ref_index(ref.points);
    for (Complex p : probes) table.reference_probes.push_back(ref_index.nearest_distance(p));
    for (Complex param : params) {
        const PointCloud cur = julia_boundary(family(param), grid, max_iter);
        SweepRow row;
        row.param = param;
        row.deficiency = directed_hausdorff(ref.points, cur.points);
        row.dH = std::max(row.deficiency, directed_hausdorff(cur.points, ref.points));
        row.dH_cells = row.dH / table.cell_size;
        const NearestIndex cur_index(cur.points);
        for (Complex p : probes) row.probes.push_back(cur_index.nearest_distance(p));
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace detail {
inline std::string fixed(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}
}  // namespace detail

inline void write_csv(std::ostream& os, const SweepTable& t) {
    os << "param,dH,dH_cells,deficiency";
    const std::size_t np = t.rows.empty() ? t.reference_probes.size() : t.rows.front().probes.size();
    for (std::size_t k = 0; k < np; ++k) os << ",probe_" << k;
    os << '\n';
    for (const auto& r : t.rows) {
        os << format_complex(r.param) << ',' << detail::fixed(r.dH) << ',' << detail::fixed(r.dH_cells) << ','
           << detail::fixed(r.deficiency);
        for (double d : r.probes) os << ',' << detail::fixed(d);
        os << '\n';
    }
}

inline void write_csv(std::ostream& os, const PointCloud& pc) {
    os << "x,y\n";
    for (Complex p : pc.points) os << detail::fixed(p.real()) << ',' << detail::fixed(p.imag()) << '\n';
}

/// Binary P6 image; boundary cells black on white.
inline void write_ppm(std::ostream& os, const BoundaryMask& m) {
    const int n = m.grid.resolution;
    os << "P6\n" << n << ' ' << n << "\n255\n";
    std::string row(static_cast<std::size_t>(n) * 3, '\xff');
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const char v = m.cells[static_cast<std::size_t>(r) * n + c] ? '\0' : '\xff';
            row[3 * c] = row[3 * c + 1] = row[3 * c + 2] = v;
        }
        os.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

enum class SweepVerdict { Converges, DoesNotConverge, Inconclusive };

inline std::string to_string(SweepVerdict v) {
    switch (v) {
        case SweepVerdict::Converges: return "converges";
        case SweepVerdict::DoesNotConverge: return "does-not-converge";
        case SweepVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// Acceptance thresholds in cell widths.
struct SweepThresholds {
    double converged_cells = 5.0;
    double separated_cells = 20.0;
};

/// Converges: d_H strictly decreasing with a final value within
/// `converged_cells`. Does not converge: every d_H at least `separated_cells`.
inline SweepVerdict sweep_verdict(const SweepTable& t, const SweepThresholds& th = {}) {
    if (t.rows.empty()) return SweepVerdict::Inconclusive;
    bool decreasing = true, separated = true;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (i > 0 && !(t.rows[i].dH_cells < t.rows[i - 1].dH_cells)) decreasing = false;
        if (t.rows[i].dH_cells < th.separated_cells) separated = false;
    }
    if (decreasing && t.rows.back().dH_cells <= th.converged_cells) return SweepVerdict::Converges;
    if (separated) return SweepVerdict::DoesNotConverge;
    return SweepVerdict::Inconclusive;
}

}  // namespace parabolic
