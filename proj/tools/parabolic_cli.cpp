#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "parabolic/experiment.hpp"

using namespace parabolic;

namespace {

Bindings bindings(const std::vector<std::string>& assignments) {
    Bindings out;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected name=value, got '" + a + "'");
        out[a.substr(0, eq)] = parse_scalar(a.substr(eq + 1));
    }
    return out;
}

std::vector<Complex> scalar_list(const std::string& text) {
    std::vector<Complex> out;
    if (text.empty()) return out;
    for (const auto& item : detail::split_list(text, ';')) out.push_back(parse_scalar(item));
    return out;
}

PointCloud read_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    PointCloud pc;
    std::string line;
    std::getline(in, line);
    if (detail::trim(line) != "x,y") throw Error(ErrorCode::ParseError, path + ": expected header x,y");
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto c = line.find(',');
        if (c == std::string::npos) throw Error(ErrorCode::ParseError, path + ": bad row '" + line + "'");
        pc.points.emplace_back(std::stod(line.substr(0, c)), std::stod(line.substr(c + 1)));
    }
    return pc;
}

template <class Fn>
void write_to(const std::string& path, Fn&& fn, bool binary = false) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
    fn(os);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parabolic implosion toolkit: fixed point splitting, gate structures, Julia set sweeps"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    std::string map_text;
    std::vector<std::string> params;
    auto add_map = [&](CLI::App* sub) {
        sub->add_option("--map", map_text, "Map expression in z")->required();
        sub->add_option("--param", params, "Parameter binding name=value (repeatable)");
    };

    // split
    auto* split = app.add_subcommand("split", "Locate and classify fixed points in a disk");
    add_map(split);
    std::string center_text = "0", out_path;
    double radius = 0.5;
    int period = 1;
    split->add_option("--center", center_text, "Disk center")->capture_default_str();
    split->add_option("--radius", radius, "Disk radius")->capture_default_str();
    split->add_option("--period", period, "Iterate f^period")->capture_default_str();
    split->add_option("--out", out_path, "CSV output (default stdout)");

    // index
    auto* index = app.add_subcommand("index", "Holomorphic fixed point index by contour quadrature");
    add_map(index);
    std::string at_text;
    double index_radius = 0.0;
    index->add_option("--at", at_text, "Fixed point")->required();
    index->add_option("--period", period, "Iterate f^period")->capture_default_str();
    index->add_option("--radius", index_radius, "Contour radius (default: half the distance to the next fixed point)");

    // gates
    auto* gates = app.add_subcommand("gates", "Detect the gate vector of a normalized perturbation");
    add_map(gates);
    int nu = 1;
    std::string phi_text = "sweep", fixed_text;
    double r0 = 0.0, gate_radius = 0.5;
    gates->add_option("--nu", nu, "Number of petals")->required();
    gates->add_option("--phi", phi_text, "Rotation angle or 'sweep'")->capture_default_str();
    gates->add_option("--r0", r0, "Seed radius (default from the fixed points)");
    gates->add_option("--fixed", fixed_text, "Fixed points separated by ';' (default: split at 0)");
    gates->add_option("--radius", gate_radius, "Split radius when --fixed is absent")->capture_default_str();

    // tree
    auto* tree = app.add_subcommand("tree", "Gate tree of a bijective gate vector");
    std::string gate_text, tendency_text;
    tree->add_option("--gates", gate_text, "Gate vector, e.g. (2,3,1,4,5)")->required();
    tree->add_option("--tendency", tendency_text, "Vertex tendencies, one of + - b per vertex");

    // oudkerk
    auto* oudkerk = app.add_subcommand("oudkerk", "Run the gate walk from every gate");
    int start_gate = 0;
    oudkerk->add_option("--gates", gate_text, "Gate vector")->required();
    oudkerk->add_option("--tendency", tendency_text, "Vertex tendencies")->required();
    oudkerk->add_option("--start", start_gate, "Single starting gate (default: all)");

    // julia
    auto* julia = app.add_subcommand("julia", "Escape-time Julia set boundary");
    add_map(julia);
    double half_width = 2.0, escape = 0.0;
    int res = 1024, max_iter = 1000;
    std::string csv_path;
    julia->add_option("--center", center_text, "Window center")->capture_default_str();
    julia->add_option("--half-width", half_width, "Window half width")->capture_default_str();
    julia->add_option("--res", res, "Cells per side (power of two)")->capture_default_str();
    julia->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
    julia->add_option("--escape", escape, "Escape radius (default: certified bound, at least 1000)");
    julia->add_option("--out", out_path, "PPM output")->required();
    julia->add_option("--csv", csv_path, "Boundary points as x,y CSV");

    // hausdorff
    auto* haus = app.add_subcommand("hausdorff", "Hausdorff distance between two x,y point files");
    std::string cloud_a, cloud_b;
    haus->add_option("a", cloud_a, "First CSV")->required();
    haus->add_option("b", cloud_b, "Second CSV")->required();

    // ray
    auto* ray = app.add_subcommand("ray", "External ray of a monic polynomial");
    add_map(ray);
    double theta = 0.0, t_end = 1e-4, t_start = 0.0;
    int steps = 8;
    ray->add_option("--theta", theta, "External angle in turns")->required();
    ray->add_option("--t-end", t_end, "Final potential")->capture_default_str();
    ray->add_option("--t-start", t_start, "Initial potential (default log(2 + max|coeff|))");
    ray->add_option("--steps", steps, "Steps per factor d of potential")->capture_default_str();
    ray->add_option("--out", out_path, "CSV output (default stdout)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Run a configured experiment");
    std::string config_path, out_dir;
    experiment->add_option("config", config_path, "Config file")->required();
    experiment->add_option("--out", out_dir, "Output directory (default: out/<name>)");

    // enumerate-gates
    auto* enumerate = app.add_subcommand("enumerate-gates", "All admissible gate vectors");
    enumerate->add_option("--nu", nu, "Number of petals (at most 8)")->required();

    CLI11_PARSE(app, argc, argv);
    set_thread_cap(threads);

    try {
        const NumericConfig& cfg = default_config();
        if (*split) {
            const auto rep = split_fixed_points(parse_map(map_text, bindings(params)), parse_scalar(center_text), radius,
                                                period, cfg);
            write_to(out_path, [&](std::ostream& os) { write_csv(os, rep); });
        } else if (*index) {
            const auto f = parse_map(map_text, bindings(params));
            std::optional<double> r;
            if (index_radius > 0) r = index_radius;
            std::cout << format_complex(holomorphic_index(f, period, parse_scalar(at_text), r, cfg)) << '\n';
        } else if (*gates) {
            const auto f = parse_map(map_text, bindings(params));
            std::vector<Complex> fps = scalar_list(fixed_text);
            if (fps.empty())
                for (const auto& p : split_fixed_points(f, 0.0, gate_radius, 1, cfg).points) fps.push_back(p.point);
            const double seed_radius = r0 > 0 ? r0 : default_r0(fps, {});
            std::vector<double> phis = default_phi_grid();
            if (phi_text != "sweep") phis = {parse_scalar(phi_text).real()};
            try {
                const auto sw = detect_gates_sweep(f, nu, seed_radius, fps, phis, cfg);
                for (const auto& [phi, why] : sw.rejected) std::cerr << "phi " << format_real(phi) << ": " << why << '\n';
                if (!sw.detection) {
                    std::cerr << "no well-behaved angle\n";
                    return 2;
                }
                std::cout << "phi = " << format_real(sw.detection->phi) << "\nr0 = " << format_real(seed_radius) << '\n';
                write_detection(std::cout, *sw.detection);
            } catch (const Error& e) {
                std::cerr << e.what() << '\n';
                return 1;
            }
        } else if (*tree) {
            const auto t = build_tree(GateVector::parse(gate_text));
            if (tendency_text.empty()) {
                write_tree(std::cout, t);
            } else {
                const auto ta = TendencyAssignment::parse(tendency_text);
                if (static_cast<int>(ta.size()) != t.vertex_count())
                    throw Error(ErrorCode::InvalidTendency, "need one tendency per vertex");
                write_tree(std::cout, t, &ta);
            }
        } else if (*oudkerk) {
            const auto t = build_tree(GateVector::parse(gate_text));
            const auto ta = TendencyAssignment::parse(tendency_text);
            if (static_cast<int>(ta.size()) != t.vertex_count())
                throw Error(ErrorCode::InvalidTendency, "need one tendency per vertex");
            try {
                if (start_gate > 0) std::cout << to_text(run_oudkerk(t, ta, start_gate)) << '\n';
                else write_prediction(std::cout, predict(t, ta));
            } catch (const IndeterminateSumError& e) {
                std::cerr << e.what() << '\n';
                return 2;
            }
        } else if (*julia) {
            const GridSpec grid{parse_scalar(center_text), half_width, res};
            const auto mask = julia_boundary_mask(parse_map(map_text, bindings(params)), grid, max_iter, escape);
            const auto cloud = mask.cloud();
            if (cloud.points.empty()) throw Error(ErrorCode::EmptyWindow, "no boundary cell in the grid window");
            write_to(out_path, [&](std::ostream& os) { write_ppm(os, mask); }, true);
            if (!csv_path.empty()) write_to(csv_path, [&](std::ostream& os) { write_csv(os, cloud); });
            std::cout << cloud.points.size() << " boundary cells, cell " << format_real(grid.cell_size()) << '\n';
        } else if (*haus) {
            const auto a = read_cloud(cloud_a), b = read_cloud(cloud_b);
            std::cout << format_real(hausdorff(a, b)) << '\n';
        } else if (*ray) {
            const auto f = parse_map(map_text, bindings(params));
            const auto r = trace_ray(f, theta, t_start > 0 ? t_start : default_t_start(f), t_end,
                                     {.steps_per_halving = steps});
            if (r.truncated) std::cerr << r.stop_reason << '\n';
            write_to(out_path, [&](std::ostream& os) { write_csv(os, r); });
        } else if (*experiment) {
            const auto ec = load_config(config_path);
            const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") / ec.name : std::filesystem::path(out_dir);
            const auto rep = run_experiment(ec, dir);
            std::ifstream report(dir / "report.txt");
            std::cout << report.rdbuf();
            return rep.exit_code();
        } else if (*enumerate) {
            for (const auto& g : enumerate_admissible(nu)) std::cout << g.to_string() << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
