#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gglangevin/cli.hpp"
#include "gglangevin/smallnet.hpp"

using namespace gg;

namespace {

namespace fs = std::filesystem;

std::string fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("config parser handles sections, comments, and types") {
    const Config cfg = Config::parse_string(
        "# a comment\n"
        "[sampler]\n"
        "sigma = 0.05  # trailing comment\n"
        "steps_per_chain = 120\n"
        "\n"
        "[run]\n"
        "seed = 42\n");
    CHECK(cfg.get_double("sampler", "sigma", 0.0) == 0.05);
    CHECK(cfg.get_long("sampler", "steps_per_chain", 0) == 120);
    CHECK(cfg.get_u64("run", "seed", 0) == 42);
    CHECK(cfg.get_or("run", "missing", "x") == "x");
    CHECK_THROWS_AS(cfg.get("run", "missing"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("[open\n"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse_string("novalue\n"), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected against a schema") {
    const Config cfg = Config::parse_string("[run]\nseed = 1\nbogus = 2\n");
    CHECK_THROWS_AS(cfg.require_known({{"run", {"seed"}}}), std::invalid_argument);
    const Config cfg2 = Config::parse_string("[mystery]\nseed = 1\n");
    CHECK_THROWS_AS(cfg2.require_known({{"run", {"seed"}}}), std::invalid_argument);
}

TEST_CASE("fmt_double round-trips doubles through decimal text") {
    for (double v : {0.1, 1.0 / 3.0, 123456.789e-12, -2.5e17}) {
        CHECK(std::stod(fmt_double(v)) == v);
    }
}

TEST_CASE("train-score command writes a model and a loss curve") {
    const std::string out = fresh_dir("gg_cli_train");
    const Config cfg = Config::parse_string(
        "[train]\n"
        "samples = 2000\n"
        "hidden = 16 16\n"
        "epochs = 3\n"
        "batch = 128\n"
        "[run]\n"
        "seed = 5\n");
    CHECK(cmd_train_score(cfg, out) == kExitOk);
    CHECK(fs::exists(out + "/score_model.txt"));
    CHECK(fs::exists(out + "/loss_curve.csv"));
}

TEST_CASE("train-score resumes from a saved model") {
    const std::string out = fresh_dir("gg_cli_train_resume");
    const Config first = Config::parse_string(
        "[train]\nsamples = 2000\nhidden = 16 16\nepochs = 2\nbatch = 128\n"
        "model_file = " + out + "/m1.txt\n[run]\nseed = 5\n");
    REQUIRE(cmd_train_score(first, out) == kExitOk);
    const Config second = Config::parse_string(
        "[train]\nsamples = 2000\nepochs = 2\nbatch = 128\n"
        "model_file = " + out + "/m2.txt\nresume = " + out + "/m1.txt\n[run]\nseed = 6\n");
    REQUIRE(cmd_train_score(second, out) == kExitOk);
    const Mlp m1 = load_mlp(out + "/m1.txt");
    const Mlp m2 = load_mlp(out + "/m2.txt");
    CHECK(m1.dims == m2.dims);  // resumed net keeps its architecture
    CHECK(m1.params != m2.params);
}

TEST_CASE("train-score signals divergence with the dedicated exit code") {
    const std::string out = fresh_dir("gg_cli_train_div");
    const Config cfg = Config::parse_string(
        "[train]\nsamples = 2000\nhidden = 16\nepochs = 2\nbatch = 128\nlr = 1e14\n"
        "[run]\nseed = 5\n");
    CHECK(cmd_train_score(cfg, out) == kExitDivergence);
}

TEST_CASE("bench rejects unknown samplers up front") {
    const std::string out = fresh_dir("gg_cli_bench_bad");
    const Config cfg = Config::parse_string("[bench]\nsamplers = bogus\n");
    CHECK(cmd_bench(cfg, out) == kExitConfig);
}

TEST_CASE("train-score rejects unknown keys with the config exit code") {
    const std::string out = fresh_dir("gg_cli_train_bad");
    const Config cfg = Config::parse_string("[train]\nwhat = 1\n");
    CHECK(cmd_train_score(cfg, out) == kExitConfig);
}

TEST_CASE("toy1d in analytic-only mode emits densities, histograms, and a summary") {
    const std::string out = fresh_dir("gg_cli_toy");
    const Config cfg = Config::parse_string(
        "[sampler]\n"
        "chains = 60\n"
        "steps_per_chain = 80\n"
        "[run]\n"
        "seed = 3\n");
    CliOverrides ov;
    ov.analytic_only = true;
    CHECK(cmd_toy1d(cfg, out, ov) == kExitOk);
    for (const char* f :
         {"density_prior.csv", "density_product_quadratic.csv", "density_product_l1.csv",
          "hist_quadratic_analytic.csv", "hist_l1_analytic.csv", "hist_prior_analytic.csv",
          "panel_quadratic_analytic.svg", "summary.json"}) {
        CHECK_MESSAGE(fs::exists(out + "/" + f), f);
    }
}

TEST_CASE("toy1d reruns are byte-identical") {
    const std::string out1 = fresh_dir("gg_cli_toy_a");
    const std::string out2 = fresh_dir("gg_cli_toy_b");
    const Config cfg = Config::parse_string(
        "[sampler]\n"
        "chains = 40\n"
        "steps_per_chain = 60\n"
        "[run]\n"
        "seed = 9\n");
    CliOverrides ov;
    ov.analytic_only = true;
    REQUIRE(cmd_toy1d(cfg, out1, ov) == kExitOk);
    REQUIRE(cmd_toy1d(cfg, out2, ov) == kExitOk);
    for (const auto& entry : fs::directory_iterator(out1)) {
        const std::string name = entry.path().filename().string();
        CHECK_MESSAGE(files_identical(out1 + "/" + name, out2 + "/" + name), name);
    }
}

TEST_CASE("reconstruct produces scan, trace, contour, and metrics artifacts") {
    const std::string out = fresh_dir("gg_cli_rec");
    const Config cfg = Config::parse_string(
        "[experiment]\n"
        "shape = arc\n"
        "regime = sparse\n"
        "sampler = map\n"
        "seed = 11\n"
        "resolution = 96\n");
    CHECK(cmd_reconstruct(cfg, out) == kExitOk);
    for (const char* f :
         {"scan.csv", "trace.csv", "contour.csv", "overlay.svg", "metrics.json", "latent.txt"}) {
        CHECK_MESSAGE(fs::exists(out + "/" + f), f);
    }
    std::ifstream trace(out + "/trace.csv");
    std::string line;
    std::getline(trace, line);
    CHECK(line == "# schema=gg-trace-v1");
}

TEST_CASE("reconstruct rejects an unknown sampler") {
    const std::string out = fresh_dir("gg_cli_rec_bad");
    const Config cfg = Config::parse_string("[experiment]\nsampler = nope\n");
    CHECK(cmd_reconstruct(cfg, out) == kExitConfig);
}

TEST_CASE("bench runs a small manifest and writes the report") {
    const std::string out = fresh_dir("gg_cli_bench");
    const Config cfg = Config::parse_string(
        "[bench]\n"
        "shapes = arc\n"
        "regimes = sparse\n"
        "samplers = map\n"
        "seeds = 1\n"
        "seed = 2\n");
    CHECK(cmd_bench(cfg, out) == kExitOk);
    CHECK(fs::exists(out + "/report.csv"));
    CHECK(fs::exists(out + "/summary.json"));
    CHECK(fs::exists(out + "/svg"));
}

TEST_CASE("environment variable overrides the output directory") {
    const std::string out = fresh_dir("gg_cli_env");
    const std::string redirected = fresh_dir("gg_cli_env_redirect");
    setenv("GG_OUT_DIR", redirected.c_str(), 1);
    const Config cfg = Config::parse_string(
        "[sampler]\nchains = 40\nsteps_per_chain = 40\n[run]\nseed = 1\n");
    CliOverrides ov;
    ov.analytic_only = true;
    CHECK(cmd_toy1d(cfg, out, ov) == kExitOk);
    unsetenv("GG_OUT_DIR");
    CHECK(fs::exists(redirected + "/summary.json"));
    CHECK_FALSE(fs::exists(out + "/summary.json"));
}
