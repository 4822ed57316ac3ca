#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "extray.hpp"
#include "fixsplit.hpp"
#include "gateflow.hpp"
#include "gatetree.hpp"
#include "juliahaus.hpp"
#include "parse.hpp"

namespace parabolic {

struct SplitBlock {
    Complex center{};
    double radius = 0.5;
};

struct GatesBlock {
    std::vector<double> phis = default_phi_grid();
    std::optional<double> r0;
};

struct SweepBlock {
    GridSpec grid;
    int max_iter = 1000;
    std::vector<Complex> probes;
    std::vector<Complex> params;  ///< empty: the experiment's sequence
    std::vector<std::string> labels;
    SweepThresholds thresholds;
};

struct RaysBlock {
    std::vector<double> angles;
    double t_end = 1e-3;
    double t_cut = 0.1;
    int steps_per_halving = 8;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::string family;
    std::string parameter;
    std::vector<Complex> params;
    std::vector<std::string> labels;  ///< text of each parameter value as given
    Complex reference{};
    int period = 1;
    std::optional<SplitBlock> split;
    std::optional<GatesBlock> gates;
    bool engine = false;
    std::optional<SweepBlock> julia_sweep;
    std::optional<RaysBlock> rays;
    NumericConfig numeric;

    MapExpr map_at(Complex p) const { return parse_map(family, {{parameter, p}}, numeric); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct ConfigLine {
    int line;
    int value_column;
    std::string value;
};

class ConfigReader {
public:
    using Section = std::map<std::string, ConfigLine, std::less<>>;

    explicit ConfigReader(std::istream& in) {
        std::string raw, section;
        sections_[""];
        for (int line = 1; std::getline(in, raw); ++line) {
            const auto hash = raw.find('#');
            const std::string text = raw.substr(0, hash);
            const std::string t = trim(text);
            if (t.empty()) continue;
            const int indent = static_cast<int>(text.find_first_not_of(" \t")) + 1;
            if (t.front() == '[') {
                if (t.back() != ']') throw ParseError(line, indent, "unterminated section header");
                section = trim(std::string_view(t).substr(1, t.size() - 2));
                if (!known_section(section)) throw ParseError(line, indent + 1, "unknown section '" + section + "'");
                if (sections_.count(section)) throw ParseError(line, indent + 1, "duplicate section '" + section + "'");
                sections_[section];
                order_.push_back(section);
                continue;
            }
            const auto eq = text.find('=');
            if (eq == std::string::npos) throw ParseError(line, indent, "expected 'key = value'");
            const std::string key = trim(std::string_view(text).substr(0, eq));
            if (key.empty()) throw ParseError(line, indent, "missing key");
            const std::string value = trim(std::string_view(text).substr(eq + 1));
            const auto vcol = text.find_first_not_of(" \t", eq + 1);
            const int col = vcol == std::string::npos ? static_cast<int>(eq) + 2 : static_cast<int>(vcol) + 1;
            if (value.empty()) throw ParseError(line, col, "missing value for '" + key + "'");
            auto& sec = sections_[section];
            if (sec.count(key)) throw ParseError(line, indent, "duplicate key '" + key + "'");
            sec.emplace(key, ConfigLine{line, col, value});
        }
    }

    bool has(const std::string& section) const { return sections_.count(section) != 0; }
    Section& section(const std::string& name) { return sections_.at(name); }

    static bool known_section(const std::string& s) {
        return s == "split" || s == "gates" || s == "engine" || s == "julia_sweep" || s == "rays" || s == "numeric";
    }

private:
    std::map<std::string, Section, std::less<>> sections_;
    std::vector<std::string> order_;
};

/// Wraps a value parse so failures carry the config position.
template <class Fn>
auto at_line(const ConfigLine& l, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ParseError& e) {
        throw ParseError(l.line, l.value_column + e.column() - 1, e.what());
    } catch (const Error& e) {
        throw ParseError(l.line, l.value_column, e.what());
    } catch (const std::exception& e) {
        throw ParseError(l.line, l.value_column, e.what());
    }
}

inline double real_value(const ConfigLine& l) {
    return at_line(l, [&] {
        const Complex c = parse_scalar(l.value);
        if (c.imag() != 0.0) throw Error(ErrorCode::ConfigError, "expected a real number");
        return c.real();
    });
}

inline int int_value(const ConfigLine& l) {
    const double x = real_value(l);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ParseError(l.line, l.value_column, "expected an integer");
    return static_cast<int>(x);
}

inline std::vector<Complex> complex_list(const ConfigLine& l, std::vector<std::string>* labels = nullptr) {
    std::vector<Complex> out;
    for (const auto& item : split_list(l.value)) {
        out.push_back(at_line(l, [&] { return parse_scalar(item); }));
        if (labels) labels->push_back(item);
    }
    return out;
}

/// `<expr> for <var> in <v1>, <v2>, ...` or a plain comma separated list.
inline std::vector<Complex> sequence(const ConfigLine& l, std::vector<std::string>& labels) {
    const auto f = l.value.find(" for ");
    if (f == std::string::npos) return complex_list(l, &labels);
    const auto in = l.value.find(" in ", f);
    if (in == std::string::npos) throw ParseError(l.line, l.value_column + static_cast<int>(f), "expected 'in'");
    const std::string expr = trim(std::string_view(l.value).substr(0, f));
    const std::string var = trim(std::string_view(l.value).substr(f + 5, in - f - 5));
    std::vector<Complex> out;
    for (const auto& item : split_list(l.value.substr(in + 4))) {
        const Complex v = at_line(l, [&] { return parse_scalar(item); });
        out.push_back(at_line(l, [&] { return parse_scalar(expr, {{var, v}}); }));
        labels.push_back(var + "=" + item);
    }
    return out;
}

inline void reject_unknown(const ConfigReader::Section& sec, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
    for (const auto& [key, line] : sec)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError(line.line, 1, "unknown key '" + key + "' in " + where);
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
    using namespace detail;
    ConfigReader r(in);
    ExperimentConfig cfg;
    auto& top = r.section("");
    reject_unknown(top, {"name", "family", "parameter", "params", "reference", "period"}, "the top level");
    auto need = [&](const char* key) -> const ConfigLine& {
        const auto it = top.find(key);
        if (it == top.end()) throw ParseError(1, 1, std::string("missing key '") + key + "'");
        return it->second;
    };
    if (top.count("name")) cfg.name = top.at("name").value;
    cfg.family = need("family").value;
    cfg.parameter = need("parameter").value;
    cfg.params = sequence(need("params"), cfg.labels);
    cfg.reference = at_line(need("reference"), [&] { return parse_scalar(top.at("reference").value); });
    if (top.count("period")) cfg.period = int_value(top.at("period"));
    if (cfg.period < 1) throw ParseError(top.at("period").line, top.at("period").value_column, "period must be positive");
    {
        const auto& fl = need("family");
        at_line(fl, [&] { return parse_map(cfg.family, {{cfg.parameter, cfg.reference}}); });
        bool uses = false;
        try {
            parse_map(cfg.family);
        } catch (const ParseError&) {
            uses = true;
        }
        if (!uses) throw ParseError(fl.line, fl.value_column, "family does not use parameter '" + cfg.parameter + "'");
    }

    if (r.has("numeric")) {
        auto& s = r.section("numeric");
        auto& n = cfg.numeric;
        const std::map<std::string, double*, std::less<>> reals{
            {"root_merge_tol", &n.root_merge_tol},   {"root_residual_tol", &n.root_residual_tol},
            {"quad_tol", &n.quad_tol},               {"degenerate_tol", &n.degenerate_tol},
            {"boundary_root_tol", &n.boundary_root_tol}, {"divergence_threshold", &n.divergence_threshold},
            {"bounded_threshold", &n.bounded_threshold}, {"rk_rel_tol", &n.rk_rel_tol},
            {"rk_abs_tol", &n.rk_abs_tol},           {"stall_tol", &n.stall_tol},
            {"arclength_factor", &n.arclength_factor}, {"endpoint_match_factor", &n.endpoint_match_factor}};
        const std::map<std::string, int*, std::less<>> ints{{"quad_nodes_max", &n.quad_nodes_max},
                                                            {"root_max_iter", &n.root_max_iter},
                                                            {"degree_guard", &n.degree_guard}};
        for (const auto& [key, line] : s) {
            if (auto it = reals.find(key); it != reals.end()) *it->second = real_value(line);
            else if (auto jt = ints.find(key); jt != ints.end()) *jt->second = int_value(line);
            else throw ParseError(line.line, 1, "unknown numeric setting '" + key + "'");
        }
    }
    if (r.has("split")) {
        auto& s = r.section("split");
        reject_unknown(s, {"center", "radius"}, "[split]");
        SplitBlock b;
        if (s.count("center")) b.center = at_line(s.at("center"), [&] { return parse_scalar(s.at("center").value); });
        if (s.count("radius")) b.radius = real_value(s.at("radius"));
        cfg.split = b;
    }
    if (r.has("gates")) {
        auto& s = r.section("gates");
        reject_unknown(s, {"phi", "r0"}, "[gates]");
        GatesBlock b;
        if (s.count("phi") && s.at("phi").value != "sweep") {
            b.phis.clear();
            for (Complex c : complex_list(s.at("phi"))) b.phis.push_back(c.real());
        }
        if (s.count("r0") && s.at("r0").value != "auto") b.r0 = real_value(s.at("r0"));
        cfg.gates = b;
    }
    if (r.has("engine")) {
        reject_unknown(r.section("engine"), {}, "[engine]");
        cfg.engine = true;
        if (!cfg.gates || !cfg.split) throw ParseError(1, 1, "[engine] needs [split] and [gates]");
    }
    if (cfg.gates && !cfg.split) throw ParseError(1, 1, "[gates] needs [split]");
    if (r.has("julia_sweep")) {
        auto& s = r.section("julia_sweep");
        reject_unknown(s, {"center", "half_width", "resolution", "max_iter", "probes", "params", "converged_cells",
                           "separated_cells"},
                       "[julia_sweep]");
        SweepBlock b;
        if (s.count("center")) b.grid.center = at_line(s.at("center"), [&] { return parse_scalar(s.at("center").value); });
        if (s.count("half_width")) b.grid.half_width = real_value(s.at("half_width"));
        if (s.count("resolution")) b.grid.resolution = int_value(s.at("resolution"));
        if (s.count("max_iter")) b.max_iter = int_value(s.at("max_iter"));
        if (s.count("probes")) b.probes = complex_list(s.at("probes"));
        if (s.count("params")) b.params = sequence(s.at("params"), b.labels);
        if (s.count("converged_cells")) b.thresholds.converged_cells = real_value(s.at("converged_cells"));
        if (s.count("separated_cells")) b.thresholds.separated_cells = real_value(s.at("separated_cells"));
        at_line(s.count("resolution") ? s.at("resolution") : ConfigLine{1, 1, ""}, [&] {
            b.grid.validate();
            return 0;
        });
        cfg.julia_sweep = b;
    }
    if (r.has("rays")) {
        auto& s = r.section("rays");
        reject_unknown(s, {"angles", "t_end", "t_cut", "steps_per_halving"}, "[rays]");
        RaysBlock b;
        if (!s.count("angles")) throw ParseError(1, 1, "[rays] needs 'angles'");
        for (Complex c : complex_list(s.at("angles"))) b.angles.push_back(c.real());
        if (s.count("t_end")) b.t_end = real_value(s.at("t_end"));
        if (s.count("t_cut")) b.t_cut = real_value(s.at("t_cut"));
        if (s.count("steps_per_halving")) b.steps_per_halving = int_value(s.at("steps_per_halving"));
        cfg.rays = b;
    }
    if (!cfg.split && !cfg.julia_sweep && !cfg.rays) throw ParseError(1, 1, "no analysis block");
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    auto cfg = parse_config(in);
    if (cfg.name == "experiment") cfg.name = path.stem().string();
    return cfg;
}

enum class Consistency { Consistent, Inconsistent, Inconclusive };

inline std::string to_string(Consistency c) {
    switch (c) {
        case Consistency::Consistent: return "CONSISTENT";
        case Consistency::Inconsistent: return "INCONSISTENT";
        case Consistency::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct RunReport {
    std::vector<SplittingReport> splits;
    std::optional<HoroVerdict> horo;
    std::optional<GateDetection> detection;
    std::vector<std::pair<double, std::string>> rejected_angles;
    std::optional<GateTree> tree;
    std::vector<int> vertex_points;  ///< fixed point index per tree vertex
    std::optional<TendencyAssignment> tendencies;
    std::optional<ConvergencePrediction> prediction;
    std::optional<SweepTable> sweep;
    std::optional<SweepVerdict> sweep_verdict;
    std::vector<std::string> ray_rows;
    std::optional<Consistency> verdict;
    std::vector<std::string> inconclusive;  ///< block: reason
    std::vector<std::string> artifacts;

    int exit_code() const {
        if (!inconclusive.empty()) return 2;
        if (verdict && *verdict != Consistency::Consistent) return 2;
        return 0;
    }
};

namespace detail {

class RunLog {
public:
    explicit RunLog(const std::filesystem::path& path) : out_(path) {}
    void operator()(const std::string& msg) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        out_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << msg << '\n' << std::flush;
    }

private:
    std::ofstream out_;
};

inline std::ofstream open_artifact(const std::filesystem::path& dir, const std::string& name, RunReport& rep,
                                   bool binary = false) {
    std::ofstream os(dir / name, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
    rep.artifacts.push_back(name);
    return os;
}

/// f^l conjugated so the cluster sits at 0 with leading term w + w^{nu+1}.
struct Normalization {
    Complex center;
    Complex scale;
    int nu = 0;
    MapExpr map_for(const MapExpr& f, int period, const NumericConfig& cfg) const {
        const Poly g = compose_power(f, period, cfg).as_poly();
        const Poly affine = Poly::constant(center) + Poly::identity() * scale;
        return MapExpr((g.compose(affine) - Poly::constant(center)) * (1.0 / scale));
    }
};

inline Normalization normalize(const MapExpr& f0, int period, Complex center, int nu, const NumericConfig& cfg) {
    const MapExpr g = compose_power(f0, period, cfg);
    if (!g.is_polynomial()) throw Error(ErrorCode::InvalidArgument, "gate detection needs a polynomial family");
    const Poly p = g.as_poly().compose(Poly::constant(center) + Poly::identity()) - Poly::constant(center) -
                   Poly::identity();
    const Complex a = p.coeff(nu + 1);
    const double scale = std::max(1.0, p.max_abs_coeff());
    for (int j = 0; j <= nu; ++j)
        if (std::abs(p.coeff(j)) > 1e-12 * scale)
            throw Error(ErrorCode::InvalidCenter, "reference map is not parabolic of multiplicity " +
                                                      std::to_string(nu + 1) + " at " + format_complex(center));
    if (std::abs(a) <= 1e-12 * scale) throw Error(ErrorCode::InvalidCenter, "multiplicity at the center exceeds the split count");
    return {center, std::exp(-std::log(a) / static_cast<double>(nu)), nu};
}

inline std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace detail

/// Runs every configured block, writing artifacts and `report.txt` to `out_dir`.
inline RunReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    detail::RunLog log(out_dir / "run.log");
    RunReport rep;
    std::ostringstream report;
    const auto& ncfg = cfg.numeric;
    report << "experiment " << cfg.name << "\nfamily = " << cfg.family << "\nparameter = " << cfg.parameter
           << "\nreference = " << format_complex(cfg.reference) << "\nperiod = " << cfg.period << "\nparams =";
    for (std::size_t i = 0; i < cfg.params.size(); ++i) report << (i ? ", " : " ") << cfg.labels[i];
    report << '\n';
    log("start " + cfg.name);

    if (cfg.split) {
        report << "\n[split]\n";
        for (std::size_t i = 0; i < cfg.params.size(); ++i) {
            rep.splits.push_back(
                split_fixed_points(cfg.map_at(cfg.params[i]), cfg.split->center, cfg.split->radius, cfg.period, ncfg));
            const std::string name = "split_" + std::to_string(i) + ".csv";
            auto os = detail::open_artifact(out_dir, name, rep);
            write_csv(os, rep.splits.back());
            report << cfg.labels[i] << ": " << to_string(rep.splits.back().classification) << " nu "
                   << rep.splits.back().nu() << " -> " << name << '\n';
        }
        try {
            rep.horo = classify_horocyclic(rep.splits, ncfg);
            for (std::size_t t = 0; t < rep.horo->tracks.size(); ++t) {
                const auto& tr = rep.horo->tracks[t];
                report << "track " << t << " ends " << format_complex(tr.points.back()) << " horo "
                       << detail::fmt(tr.horo.back()) << ' ' << to_string(tr.verdict)
                       << (rep.horo->distinguished == t ? " distinguished" : "") << '\n';
            }
            report << "ell = " << rep.horo->ell << '\n';
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AmbiguousTrack && e.code() != ErrorCode::TrackMatchFailure) throw;
            rep.inconclusive.push_back(std::string("split: ") + e.what());
            report << "horocyclic: " << e.what() << '\n';
        }
        log("split done");
    }

    if (cfg.gates && rep.horo) {
        report << "\n[gates]\n";
        const auto& last = rep.splits.back();
        const int nu = last.nu();
        const auto norm = detail::normalize(cfg.map_at(cfg.reference), cfg.period, cfg.split->center, nu, ncfg);
        const MapExpr g = norm.map_for(cfg.map_at(cfg.params.back()), cfg.period, ncfg);
        std::vector<Complex> cluster, others;
        for (const auto& p : last.points) cluster.push_back((p.point - norm.center) / norm.scale);
        for (const auto& r : roots(fixed_point_poly(g, 1, ncfg), ncfg)) {
            bool inside = false;
            for (Complex c : cluster) inside = inside || std::abs(r.value - c) <= 1e-6 * (1.0 + std::abs(c));
            if (!inside) others.push_back(r.value);
        }
        const double r0 = cfg.gates->r0 ? *cfg.gates->r0 : default_r0(cluster, others);
        report << "normalization scale = " << format_complex(norm.scale) << "\nr0 = " << format_real(r0) << '\n';
        auto sweep = detect_gates_sweep(g, nu, r0, cluster, cfg.gates->phis, ncfg);
        rep.rejected_angles = sweep.rejected;
        for (const auto& [phi, why] : sweep.rejected) report << "phi " << format_real(phi) << " rejected: " << why << '\n';
        if (sweep.detection) {
            rep.detection = *sweep.detection;
            auto os = detail::open_artifact(out_dir, "gates.txt", rep);
            write_detection(os, *rep.detection);
            report << "phi = " << format_real(rep.detection->phi) << "\ngate_vector = " << rep.detection->gate.to_string()
                   << " -> gates.txt\n";
        } else {
            rep.inconclusive.push_back("gates: no well-behaved angle");
            report << "no well-behaved angle\n";
        }
        log("gates done");
    }

    if (cfg.engine && rep.detection) {
        report << "\n[engine]\n";
        try {
            rep.tree = build_tree(rep.detection->gate);
            rep.vertex_points = assign_vertices(*rep.tree, *rep.detection);
            const auto& last = rep.splits.back();
            std::vector<std::size_t> track_of(rep.vertex_points.size());
            std::vector<Tendency> tendency;
            for (std::size_t v = 0; v < rep.vertex_points.size(); ++v) {
                const Complex pt = last.points[static_cast<std::size_t>(rep.vertex_points[v])].point;
                for (std::size_t t = 0; t < rep.horo->tracks.size(); ++t)
                    if (rep.horo->tracks[t].points.back() == pt) track_of[v] = t;
                tendency.push_back(rep.horo->tracks[track_of[v]].verdict);
            }
            rep.tendencies = TendencyAssignment(tendency);
            const auto& tracks = rep.horo->tracks;
            const SumResolver resolver = [&](const std::vector<long>& c) {
                std::vector<double> series(tracks.front().horo.size(), 0.0);
                for (std::size_t v = 0; v < c.size(); ++v)
                    for (std::size_t s = 0; s < series.size(); ++s)
                        series[s] += static_cast<double>(c[v]) * tracks[track_of[v]].horo[s];
                return classify_series(series, ncfg);
            };
            rep.prediction = predict(*rep.tree, *rep.tendencies, resolver);
            {
                auto os = detail::open_artifact(out_dir, "tree.txt", rep);
                write_tree(os, *rep.tree, &*rep.tendencies);
                for (std::size_t v = 0; v < rep.vertex_points.size(); ++v)
                    os << "vertex " << v << " point "
                       << format_complex(last.points[static_cast<std::size_t>(rep.vertex_points[v])].point) << '\n';
            }
            {
                auto os = detail::open_artifact(out_dir, "oudkerk.txt", rep);
                write_prediction(os, *rep.prediction);
            }
            report << "tree -> tree.txt\nruns -> oudkerk.txt\n";
            for (const auto& run : rep.prediction->runs) report << to_text(run) << '\n';
            report << "ell = " << rep.prediction->ell
                   << "\njulia_converges = " << (rep.prediction->julia_converges ? "true" : "false") << '\n';
        } catch (const Error& e) {
            const auto c = e.code();
            if (c != ErrorCode::IndeterminateSum && c != ErrorCode::InvalidTendency && c != ErrorCode::NotWellBehaved)
                throw;
            rep.inconclusive.push_back(std::string("engine: ") + e.what());
            report << e.what() << '\n';
        }
        log("engine done");
    }

    if (cfg.julia_sweep) {
        const auto& b = *cfg.julia_sweep;
        report << "\n[julia_sweep]\n";
        const auto& params = b.params.empty() ? cfg.params : b.params;
        const auto& labels = b.params.empty() ? cfg.labels : b.labels;
        rep.sweep = convergence_sweep([&](Complex p) { return cfg.map_at(p); }, params, cfg.reference, b.grid,
                                      b.max_iter, b.probes);
        rep.sweep_verdict = sweep_verdict(*rep.sweep, b.thresholds);
        {
            auto os = detail::open_artifact(out_dir, "sweep.csv", rep);
            write_csv(os, *rep.sweep);
        }
        {
            auto os = detail::open_artifact(out_dir, "julia_reference.ppm", rep, true);
            write_ppm(os, julia_boundary_mask(cfg.map_at(cfg.reference), b.grid, b.max_iter));
        }
        {
            auto os = detail::open_artifact(out_dir, "julia_last.ppm", rep, true);
            write_ppm(os, julia_boundary_mask(cfg.map_at(params.back()), b.grid, b.max_iter));
        }
        report << "cell = " << format_real(rep.sweep->cell_size) << '\n';
        for (std::size_t i = 0; i < rep.sweep->rows.size(); ++i) {
            const auto& row = rep.sweep->rows[i];
            report << labels[i] << ": dH_cells " << detail::fmt(row.dH_cells) << " deficiency_cells "
                   << detail::fmt(row.deficiency / rep.sweep->cell_size);
            for (double d : row.probes) report << " probe " << detail::fmt(d);
            report << '\n';
        }
        for (std::size_t k = 0; k < rep.sweep->reference_probes.size(); ++k)
            report << "reference probe_" << k << " " << detail::fmt(rep.sweep->reference_probes[k]) << '\n';
        report << "sweep -> sweep.csv\nverdict = " << to_string(*rep.sweep_verdict) << '\n';
        if (*rep.sweep_verdict == SweepVerdict::Inconclusive) rep.inconclusive.push_back("julia_sweep: inconclusive");
        log("julia_sweep done");
    }

    if (cfg.rays) {
        const auto& b = *cfg.rays;
        report << "\n[rays]\n";
        auto os = detail::open_artifact(out_dir, "rays.csv", rep);
        os << "param,theta,tail_distance,truncated\n";
        const MapExpr f0 = cfg.map_at(cfg.reference);
        const RayOptions opt{.steps_per_halving = b.steps_per_halving};
        for (std::size_t a = 0; a < b.angles.size(); ++a) {
            const double theta = b.angles[a];
            const auto ref = trace_ray(f0, theta, default_t_start(f0), b.t_end, opt);
            {
                auto ros = detail::open_artifact(out_dir, "ray_reference_" + std::to_string(a) + ".csv", rep);
                write_csv(ros, ref);
            }
            for (std::size_t i = 0; i < cfg.params.size(); ++i) {
                const MapExpr f = cfg.map_at(cfg.params[i]);
                const auto ray = trace_ray(f, theta, default_t_start(f), b.t_end, opt);
                const double d = ray_tail_distance(ray, ref, b.t_cut);
                std::ostringstream row;
                row << format_complex(cfg.params[i]) << ',' << format_real(theta) << ',' << detail::fmt(d) << ','
                    << (ray.truncated ? "true" : "false");
                os << row.str() << '\n';
                rep.ray_rows.push_back(row.str());
                report << cfg.labels[i] << " theta " << format_real(theta) << " tail " << detail::fmt(d)
                       << (ray.truncated ? " truncated" : "") << '\n';
            }
        }
        report << "rays -> rays.csv\n";
        log("rays done");
    }

    if (rep.prediction && rep.sweep_verdict) {
        const bool engine = rep.prediction->julia_converges;
        if (*rep.sweep_verdict == SweepVerdict::Inconclusive) rep.verdict = Consistency::Inconclusive;
        else if (engine == (*rep.sweep_verdict == SweepVerdict::Converges)) rep.verdict = Consistency::Consistent;
        else rep.verdict = Consistency::Inconsistent;
        report << "\n[verdict]\nengine julia_converges = " << (engine ? "true" : "false")
               << "\nsweep = " << to_string(*rep.sweep_verdict) << "\n" << to_string(*rep.verdict) << '\n';
    }
    for (const auto& why : rep.inconclusive) report << "inconclusive: " << why << '\n';
    report << "\nartifacts:\n";
    for (const auto& a : rep.artifacts) report << "  " << a << '\n';
    report << "exit_code = " << rep.exit_code() << '\n';
    {
        std::ofstream os(out_dir / "report.txt");
        if (!os) throw Error(ErrorCode::IoError, "cannot write report.txt");
        os << report.str();
    }
    log("done exit " + std::to_string(rep.exit_code()));
    return rep;
}

}  // namespace parabolic
