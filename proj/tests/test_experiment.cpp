#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "parabolic/experiment.hpp"

using namespace parabolic;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ParseError parse_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "no ParseError for:\n" << text;
    return ParseError(0, 0, "");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string small = R"(name = small
family = a*z + z^2
parameter = a
params = 1 - 1/n for n in 16, 64, 128
reference = 1

[split]
radius = 0.75

[gates]

[engine]

[julia_sweep]
half_width = 2
resolution = 64
max_iter = 200
probes = 0.5, -1
)";

}  // namespace

TEST(Config, Sequence) {
    const auto c = parse(small);
    EXPECT_EQ(c.name, "small");
    ASSERT_EQ(c.params.size(), 3u);
    EXPECT_EQ(c.params[0], Complex(0.9375));
    EXPECT_EQ(c.params[2], Complex(1.0 - 1.0 / 128));
    EXPECT_EQ(c.labels[1], "n=64");
    ASSERT_TRUE(c.julia_sweep);
    EXPECT_EQ(c.julia_sweep->grid.resolution, 64);
    EXPECT_EQ(c.julia_sweep->probes.size(), 2u);
    EXPECT_TRUE(c.engine);
    EXPECT_EQ(c.gates->phis, default_phi_grid());
}

TEST(Config, PlainListAndNumeric) {
    const auto c = parse("family = z^2 + c\nparameter = c\nparams = -1, 0.25 + 0.1i\nreference = 0\n"
                         "[rays]\nangles = 0, 1/3\n[numeric]\nquad_tol = 1e-9\nquad_nodes_max = 2048\n");
    EXPECT_EQ(c.params[1], Complex(0.25, 0.1));
    EXPECT_DOUBLE_EQ(c.numeric.quad_tol, 1e-9);
    EXPECT_EQ(c.numeric.quad_nodes_max, 2048);
    EXPECT_NEAR(c.rays->angles[1], 1.0 / 3.0, 1e-15);
}

TEST(Config, ErrorsCarryPosition) {
    const std::string head = "family = a*z + z^2\nparameter = a\nparams = 0.5\nreference = 1\n";
    auto e = parse_error(head + "[split]\nradius = 0.5\nfoo = 1\n");
    EXPECT_EQ(e.line(), 7);
    e = parse_error(head + "[bogus]\n");
    EXPECT_EQ(e.line(), 5);
    e = parse_error("family = a*z + z^2\nparameter = a\nparams = 1 - 1/n for n in 4, 8*\nreference = 1\n[split]\n");
    EXPECT_EQ(e.line(), 3);
    e = parse_error(head + "[julia_sweep]\nresolution = 100\n");
    EXPECT_EQ(e.line(), 6);
    e = parse_error("family = z + z^2\nparameter = a\nparams = 1\nreference = 1\n[split]\n");
    EXPECT_NE(std::string(e.what()).find("does not use"), std::string::npos);
    e = parse_error("parameter = a\nparams = 1\nreference = 1\n[split]\n");
    EXPECT_NE(std::string(e.what()).find("family"), std::string::npos);
    e = parse_error(head + "[engine]\n");
    EXPECT_NE(std::string(e.what()).find("needs"), std::string::npos);
    e = parse_error(head);
    EXPECT_NE(std::string(e.what()).find("no analysis block"), std::string::npos);
}

TEST(Config, BundledConfigsLoad) {
    for (const char* name : {"thm1_radial", "thm1_tangential", "oudkerk_z4"}) {
        const auto c = load_config(fs::path(CONFIG_DIR) / (std::string(name) + ".cfg"));
        EXPECT_EQ(c.name, name);
        EXPECT_TRUE(c.engine);
        EXPECT_TRUE(c.julia_sweep);
    }
}

TEST(Experiment, SmallRunWritesArtifactsDeterministically) {
    const auto cfg = parse(small);
    const fs::path base = fs::temp_directory_path() / "parabolic_experiment_test";
    fs::remove_all(base);
    set_thread_cap(1);
    const auto a = run_experiment(cfg, base / "one");
    set_thread_cap(4);
    const auto b = run_experiment(cfg, base / "four");
    set_thread_cap(0);
    for (const char* f : {"split_0.csv", "split_1.csv", "gates.txt", "tree.txt", "oudkerk.txt", "sweep.csv",
                          "julia_reference.ppm", "julia_last.ppm", "report.txt", "run.log"}) {
        ASSERT_TRUE(fs::exists(base / "one" / f)) << f;
        if (std::string(f) != "run.log") {
            EXPECT_EQ(slurp(base / "one" / f), slurp(base / "four" / f)) << f;
        }
    }
    ASSERT_TRUE(a.prediction);
    EXPECT_TRUE(a.prediction->julia_converges);
    EXPECT_EQ(a.detection->gate.to_string(), "(1)");
    EXPECT_EQ(a.exit_code(), b.exit_code());
    const std::string report = slurp(base / "one" / "report.txt");
    EXPECT_NE(report.find("julia_converges = true"), std::string::npos);
    EXPECT_NE(report.find("exit_code = " + std::to_string(a.exit_code())), std::string::npos);
    fs::remove_all(base);
}

TEST(Experiment, AmbiguousTrackIsInconclusive) {
    // a -> 1 along a horocycle-crossing path: Re 1/(1-a) oscillates between the thresholds
    const auto cfg = parse("family = a*z + z^2\nparameter = a\nparams = 1 - 1/30, 1 + 0.05i, 1 - 1/30, 1 + 0.05i\n"
                           "reference = 1\n[split]\nradius = 0.75\n");
    const fs::path dir = fs::temp_directory_path() / "parabolic_experiment_ambiguous";
    const auto rep = run_experiment(cfg, dir);
    EXPECT_FALSE(rep.horo);
    EXPECT_EQ(rep.exit_code(), 2);
    fs::remove_all(dir);
}
