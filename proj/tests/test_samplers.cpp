#include <doctest.h>

#include <cmath>

#include "gglangevin/reference.hpp"
#include "gglangevin/samplers.hpp"

using namespace gg;

namespace {

// Score-free oracle: isolates the guidance-only Langevin process.
class ZeroOracle final : public ScoreOracle {
public:
    explicit ZeroOracle(std::size_t d) : d_(d) {}
    std::size_t dim() const override { return d_; }
    std::vector<double> noisy_score(const Latent&, double) const override {
        return std::vector<double>(d_, 0.0);
    }
    std::vector<double> denoiser_vjp(const Latent&, double,
                                     const std::vector<double>& cot) const override {
        return cot;
    }

private:
    std::size_t d_;
};

double sample_variance(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / xs.size();
}

}  // namespace

TEST_CASE("langevin step with zero noise level is the identity") {
    const GmmScoreOracle oracle(GmmPrior::single({0.0}, {1.0}));
    Rng rng(1);
    const Latent z = {0.37};
    CHECK(langevin_step(oracle, z, 0.0, rng)[0] == 0.37);
}

TEST_CASE("half-denoising step approaches the identity as sigma shrinks") {
    const GmmScoreOracle oracle(GmmPrior::single({0.0}, {1.0}));
    Rng rng(2);
    const Latent z = {0.8};
    const Latent out = half_denoising_step(oracle, z, 1e-8, rng);
    CHECK(std::abs(out[0] - 0.8) < 1e-6);
    CHECK_THROWS_AS(half_denoising_step(oracle, z, 0.0, rng), std::invalid_argument);
}

TEST_CASE("langevin on a standard normal keeps unit variance") {
    const GmmPrior prior = GmmPrior::single({0.0}, {1.0});
    const GmmScoreOracle oracle(prior);
    StationaryRunConfig cfg;
    cfg.method = ToyMethod::LangevinTrue;
    cfg.init = ToyInit::Prior;
    cfg.chains = 80000;
    cfg.steps_per_chain = 10;
    cfg.burn_in_frac = 0.0;
    cfg.sigma = 0.1;
    cfg.seed = 11;
    const std::vector<double> samples = stationary_samples(oracle, prior, zero_guidance(1), cfg);
    CHECK(samples.size() == 800000);
    CHECK(std::abs(sample_variance(samples) - 1.0) < 0.02);
}

TEST_CASE("langevin steps are reproducible per seed") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    Rng a(7), b(7);
    Latent za = {0.3}, zb = {0.3};
    for (int t = 0; t < 100; ++t) {
        za = langevin_step(oracle, za, 0.1, a);
        zb = langevin_step(oracle, zb, 0.1, b);
    }
    CHECK(za == zb);
}

TEST_CASE("half-denoising matches the prior distribution at small sigma") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const GmmScoreOracle oracle(prior);
    const Density1D density = gmm_density_1d(prior);
    StationaryRunConfig cfg;
    cfg.method = ToyMethod::HalfDenoising;
    cfg.init = ToyInit::Prior;
    cfg.chains = 2000;
    cfg.steps_per_chain = 110;
    cfg.sigma = 0.1;
    cfg.seed = 12;
    const std::vector<double> samples = stationary_samples(oracle, prior, zero_guidance(1), cfg);
    CHECK(tv_distance(samples, density, 50) < 0.05);
}

TEST_CASE("zero-net learned oracle takes the same half-denoising step as the analytic one") {
    Rng init(3);
    const LearnedScoreOracle learned(NoisePredictor{Mlp::init({2, 8, 1}, init)});
    const GmmScoreOracle analytic(GmmPrior::single({0.0}, {1.0}));
    Rng ra(5), rb(5);
    Latent za = {0.6}, zb = {0.6};
    for (int t = 0; t < 50; ++t) {
        za = half_denoising_step(learned, za, 0.1, ra);
        zb = half_denoising_step(analytic, zb, 0.1, rb);
        CHECK(za[0] == doctest::Approx(zb[0]).epsilon(1e-13));
        za = zb;  // keep the trajectories aligned against ulp drift
    }
}

TEST_CASE("guided true-score step with zero strength is the plain step") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    Rng a(9), b(9);
    const Latent z = {0.4};
    const std::vector<double> grad = {123.0};
    CHECK(guided_langevin_true_step(oracle, z, 0.1, 0.0, grad, a) == langevin_step(oracle, z, 0.1, b));
}

TEST_CASE("guided sampling with a quadratic weight matches the product density") {
    const GmmPrior prior = GmmPrior::single({0.0}, {1.0});
    const GmmScoreOracle oracle(prior);
    const double eta = 1.0, mu = 1.0, sigma = 0.1;
    const Density1D product = product_density_quadratic(prior, eta, mu);
    StationaryRunConfig cfg;
    cfg.method = ToyMethod::GuidedTrue;
    cfg.init = ToyInit::Rejection;
    cfg.eta_for_rejection = eta;
    cfg.chains = 1000;
    cfg.steps_per_chain = 220;
    cfg.sigma = sigma;
    cfg.beta = eta * sigma * sigma / 2.0;
    cfg.seed = 13;
    const std::vector<double> samples =
        stationary_samples(oracle, prior, make_quadratic_guidance(mu), cfg);
    CHECK(tv_distance(samples, product, 50) < 0.03);
}

TEST_CASE("hdnd with zero guidance reduces to half-denoising bit for bit") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    Rng a(15), b(15);
    Latent za = {-0.9}, zb = {-0.9};
    for (int t = 0; t < 60; ++t) {
        za = hdnd_step_plain(oracle, za, 0.05, 0.7, {0.0}, a);
        zb = half_denoising_step(oracle, zb, 0.05, b);
    }
    CHECK(za == zb);
}

TEST_CASE("hdnd parts expose the noised and half-denoised states") {
    const GmmScoreOracle oracle(GmmPrior::single({0.0}, {1.0}));
    Rng rng(16);
    const Latent z = {0.2};
    const HdndParts parts = hdnd_step(oracle, z, 0.3, {1.5}, rng);
    const double expected_half =
        parts.noised[0] + 0.5 * 0.3 * 0.3 * (-parts.noised[0] / (1.0 + 0.09));
    CHECK(parts.half_denoised[0] == doctest::Approx(expected_half).epsilon(1e-14));
    CHECK(parts.guidance_grad[0] == 1.5);
    CHECK_THROWS_AS(hdnd_step(oracle, z, 0.3, {std::nan("")}, rng), DivergenceError);
}

TEST_CASE("raw gg run with zero guidance is bit-identical to a half-denoising loop") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 0.002;
    cfg.steps = 200;
    cfg.seed = 17;
    RunOptions opts;
    opts.use_adam = false;
    const Latent z0 = {0.95};
    const SamplerTrace trace = gg_langevin_run(oracle, zero_guidance(1), z0, cfg, opts);

    Rng rng(17);
    Latent z = z0;
    for (long t = 0; t < cfg.steps; ++t) z = half_denoising_step(oracle, z, 0.05, rng);
    CHECK(trace.final_z == z);
    CHECK(trace.steps_completed == 200);
    CHECK_FALSE(trace.diverged);
}

TEST_CASE("raw gg run with a zero score is Langevin on the guidance weight alone") {
    const ZeroOracle oracle(1);
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 0.00125;  // eta = 1
    cfg.steps = 150;
    cfg.seed = 18;
    RunOptions opts;
    opts.use_adam = false;
    const Latent z0 = {0.1};
    const GuidanceFn guidance = make_quadratic_guidance(0.3);
    const SamplerTrace trace = gg_langevin_run(oracle, guidance, z0, cfg, opts);

    Rng rng(18);
    Latent z = z0;
    for (long t = 0; t < cfg.steps; ++t) {
        const double noised = z[0] + 0.05 * rng.normal();
        const LossEval ev = guidance(z, rng);
        z[0] = noised - cfg.beta * ev.grad[0];
    }
    CHECK(trace.final_z == z);
}

TEST_CASE("adam-mode gg run records the cosine schedule and keeps the tail constant") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::cosine_anneal(0.2, 0.02, 300, 100);
    cfg.beta = 0.03;
    cfg.steps = 400;
    cfg.seed = 19;
    const SamplerTrace trace = gg_langevin_run(oracle, make_quadratic_guidance(0.5), {0.9}, cfg);
    REQUIRE(trace.records.size() == 400);
    CHECK(trace.records.front().sigma == doctest::Approx(0.2));
    for (std::size_t i = 300; i < 400; ++i) {
        CHECK(trace.records[i].sigma == 0.02);  // constant towards the end of sampling
    }
    CHECK_FALSE(trace.diverged);
    CHECK(vec_finite(trace.final_z));
}

TEST_CASE("gg run aborts with a partial trace on divergence") {
    const GmmScoreOracle oracle(GmmPrior::single({0.0}, {1.0}));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 1.0;
    cfg.steps = 1000;
    cfg.seed = 20;
    RunOptions opts;
    opts.use_adam = false;
    // guidance that blows the iterate up past the norm limit
    const GuidanceFn explosive = [](const Latent& z, Rng&) {
        LossEval ev;
        ev.grad.assign(z.size(), -1e6);
        ev.value = 1e6;
        return ev;
    };
    const SamplerTrace trace = gg_langevin_run(oracle, explosive, {0.0}, cfg, opts);
    CHECK(trace.diverged);
    CHECK(trace.steps_completed < 1000);
}

TEST_CASE("gg runs are reproducible") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 0.01;
    cfg.steps = 300;
    cfg.seed = 21;
    const SamplerTrace a = gg_langevin_run(oracle, make_l1_guidance(0.2), {0.5}, cfg);
    const SamplerTrace b = gg_langevin_run(oracle, make_l1_guidance(0.2), {0.5}, cfg);
    CHECK(a.final_z == b.final_z);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].loss.total == b.records[i].loss.total);
    }
}

TEST_CASE("map run fits a single disk to a dense circle") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    PointCloud2 cloud;
    for (int i = 0; i < 200; ++i) {
        const double ang = 2.0 * M_PI * i / 200.0;
        cloud.points.push_back({0.1 + 0.4 * std::cos(ang), -0.05 + 0.4 * std::sin(ang)});
    }
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 0.01;
    cfg.steps = 800;
    cfg.seed = 22;
    GuidanceConfig gcfg;
    gcfg.lambda = 0.1;
    gcfg.xi = 0.0;
    gcfg.m_eikonal = 64;
    const SamplerTrace trace = map_run(dec, cloud, cfg, gcfg);
    CHECK_FALSE(trace.diverged);
    CHECK(trace.records.back().loss.surface <= 1e-3);

    const SamplerTrace again = map_run(dec, cloud, cfg, gcfg);
    CHECK(trace.final_z == again.final_z);
}

TEST_CASE("map objective gradient vanishes at an exactly fitted disk") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    const double rho = 0.5;
    const double r = softplus(rho);
    const Latent z = {0.0, 0.0, rho};
    PointCloud2 cloud;
    cloud.points = {{r, 0.0}, {-r, 0.0}, {0.0, r}, {0.0, -r}};  // |D| = 0 bitwise
    GuidanceConfig gcfg;
    gcfg.lambda = 0.1;
    gcfg.xi = 0.0;
    gcfg.m_eikonal = 64;
    Rng rng(123);
    const LossEval ev = map_objective(dec, z, cloud, gcfg, rng);
    CHECK(ev.breakdown.surface == 0.0);       // sign(0) = 0 convention
    CHECK(vec_norm(ev.grad) <= 1e-10);        // eikonal residual of an exact SDF
}

TEST_CASE("dps with zero guidance reproduces the prior histogram") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const GmmScoreOracle oracle(prior);
    const Density1D density = gmm_density_1d(prior);
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);  // unused by dps
    cfg.beta = 0.0;
    cfg.steps = 400;
    DpsOptions opts;
    opts.zeta = 0.0;
    opts.trace_stride = 1000;
    CHECK(opts.sigma_T == 80.0);
    std::vector<double> terminal;
    terminal.reserve(10000);
    for (int c = 0; c < 10000; ++c) {
        cfg.seed = 40000 + c;
        const SamplerTrace t = dps_run(oracle, zero_guidance(1), {0.0}, cfg, opts);
        REQUIRE_FALSE(t.diverged);
        terminal.push_back(t.final_z[0]);
    }
    CHECK(tv_distance(terminal, density, 50) < 0.05);
}

TEST_CASE("dps runs are reproducible and accept guidance") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.steps = 200;
    cfg.seed = 23;
    DpsOptions opts;
    opts.zeta = 0.05;
    const SamplerTrace a = dps_run(oracle, make_quadratic_guidance(0.5), {0.2}, cfg, opts);
    const SamplerTrace b = dps_run(oracle, make_quadratic_guidance(0.5), {0.2}, cfg, opts);
    CHECK(a.final_z == b.final_z);
    CHECK(vec_finite(a.final_z));
}

TEST_CASE("daps with zero guidance reproduces the prior histogram") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const GmmScoreOracle oracle(prior);
    const Density1D density = gmm_density_1d(prior);
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.steps = 5000;  // 20 levels at 250 steps per level
    DapsOptions opts;
    opts.eta = 0.0;
    CHECK(opts.sigma_max == 1.0);
    CHECK(opts.steps_per_level == 250);
    std::vector<double> terminal;
    terminal.reserve(4000);
    for (int c = 0; c < 4000; ++c) {
        cfg.seed = 50000 + c;
        const SamplerTrace t = daps_run(oracle, zero_guidance(1), {0.0}, cfg, opts);
        REQUIRE_FALSE(t.diverged);
        terminal.push_back(t.final_z[0]);
    }
    CHECK(tv_distance(terminal, density, 50) < 0.05);
}

TEST_CASE("daps runs are reproducible") {
    const GmmScoreOracle oracle(GmmPrior::bimodal1d(1.0, 0.04));
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.steps = 1000;
    cfg.seed = 24;
    const SamplerTrace a = daps_run(oracle, make_quadratic_guidance(0.5), {0.3}, cfg);
    const SamplerTrace b = daps_run(oracle, make_quadratic_guidance(0.5), {0.3}, cfg);
    CHECK_FALSE(a.diverged);
    CHECK(a.final_z == b.final_z);
    CHECK(a.records.size() == 4);  // one record per level
}

TEST_CASE("hdnd and exact guided Langevin agree in distribution") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const GmmScoreOracle oracle(prior);
    const double eta = 2.0, mu = 0.5, sigma = 0.05;
    StationaryRunConfig cfg;
    cfg.init = ToyInit::Rejection;
    cfg.eta_for_rejection = eta;
    cfg.chains = 500;
    cfg.steps_per_chain = 120;
    cfg.sigma = sigma;
    cfg.beta = eta * sigma * sigma / 2.0;
    cfg.seed = 25;
    cfg.method = ToyMethod::Hdnd;
    const std::vector<double> hdnd =
        stationary_samples(oracle, prior, make_quadratic_guidance(mu), cfg);
    cfg.method = ToyMethod::GuidedTrue;
    cfg.seed = 26;
    const std::vector<double> exact =
        stationary_samples(oracle, prior, make_quadratic_guidance(mu), cfg);
    const Density1D product = product_density_quadratic(prior, eta, mu);
    const double tv_h = tv_distance(hdnd, product, 50);
    const double tv_e = tv_distance(exact, product, 50);
    CHECK(tv_h < 0.08);
    CHECK(tv_e < 0.08);
}

TEST_CASE("langevin step demands a true score") {
    Rng init(27);
    const LearnedScoreOracle learned(NoisePredictor{Mlp::init({2, 4, 1}, init)});
    Rng rng(28);
    CHECK_THROWS_AS(langevin_step(learned, {0.0}, 0.1, rng), std::logic_error);
    CHECK_THROWS_AS(guided_langevin_true_step(learned, {0.0}, 0.1, 0.1, {0.0}, rng),
                    std::logic_error);
}
