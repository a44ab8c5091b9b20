#include <doctest.h>

#include <cmath>

#include "gglangevin/reference.hpp"

using namespace gg;

namespace {

double normal_pdf(double x, double m, double v) {
    return std::exp(-0.5 * (x - m) * (x - m) / v) / std::sqrt(2.0 * M_PI * v);
}

}  // namespace

TEST_CASE("adaptive simpson handles smooth, flat, and kinked integrands") {
    const double z1 = adaptive_simpson([](double x) { return normal_pdf(x, 0.0, 1.0); }, -10, 10, 1e-12);
    CHECK(z1 == doctest::Approx(1.0).epsilon(1e-10));
    const double z2 = adaptive_simpson([](double) { return 1.0; }, 0.0, 2.0, 1e-12);
    CHECK(z2 == doctest::Approx(2.0).epsilon(1e-14));
    const double z3 = adaptive_simpson([](double x) { return std::exp(-std::abs(x)); }, -20, 20, 1e-11);
    // antiderivative: 2 (1 - e^-20)
    CHECK(z3 == doctest::Approx(2.0 * (1.0 - std::exp(-20.0))).epsilon(1e-10));
    CHECK(std::abs(z3 - 2.0) < 1e-8);
}

TEST_CASE("quadrature_normalize builds a unit-mass density") {
    auto [Z, density] = quadrature_normalize([](double x) { return std::exp(-std::abs(x)); }, -20, 20, 1e-11);
    CHECK(Z == doctest::Approx(2.0 * (1.0 - std::exp(-20.0))).epsilon(1e-10));
    CHECK(density.cdf(20.0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(density.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("quadratic product of a standard normal is a shrunk Gaussian") {
    const GmmPrior prior = GmmPrior::single({0.0}, {1.0});
    const GmmPrior product = product_mixture_quadratic(prior, 1.0, 0.0);
    CHECK(product.means[0][0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(product.vars[0][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("quadratic product with tiny eta recovers the prior") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const GmmPrior product = product_mixture_quadratic(prior, 1e-12, 0.3);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(product.means[i][0] == doctest::Approx(prior.means[i][0]).epsilon(1e-9));
        CHECK(product.vars[i][0] == doctest::Approx(prior.vars[i][0]).epsilon(1e-9));
        CHECK(product.weights[i] == doctest::Approx(0.5).epsilon(1e-9));
    }
}

TEST_CASE("closed-form quadratic product matches the quadrature route pointwise") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const double eta = 2.0, mu = 0.5;
    const Density1D closed = product_density_quadratic(prior, eta, mu);
    auto raw = [&](double z) {
        return std::exp(gmm_noisy_logpdf(prior, 0.0, {z}) - eta * (z - mu) * (z - mu));
    };
    const Density1D numeric = quadrature_normalize(raw, closed.a(), closed.b(), 1e-13).second;
    for (int i = 0; i < 1000; ++i) {
        const double z = closed.a() + (closed.b() - closed.a()) * i / 999.0;
        CHECK(std::abs(closed.pdf(z) - numeric.pdf(z)) <= 1e-8);
    }
}

TEST_CASE("l1 product: eta to zero recovers the prior and symmetry holds") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const Density1D weak = product_density_l1(prior, 1e-12, 0.0);
    const Density1D prior_density = gmm_density_1d(prior);
    for (double z : {-1.2, -0.4, 0.0, 0.7, 1.3}) {
        CHECK(weak.pdf(z) == doctest::Approx(prior_density.pdf(z)).epsilon(1e-6));
    }
    const Density1D sym = product_density_l1(prior, 2.0, 0.0);
    for (double z : {0.1, 0.5, 0.9, 1.4}) {
        CHECK(sym.pdf(z) == doctest::Approx(sym.pdf(-z)).epsilon(1e-9));
    }
}

TEST_CASE("l1 product normalization agrees with a Monte-Carlo importance estimate") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const double eta = 2.0, mu = 0.5;
    auto raw = [&](double z) {
        return std::exp(gmm_noisy_logpdf(prior, 0.0, {z}) - eta * std::abs(z - mu));
    };
    const double Z = quadrature_normalize(raw, -2.6, 2.6, 1e-12).first;
    // E_prior[exp(-eta |z - mu|)] estimated by direct sampling
    Rng rng(31337);
    const std::size_t n = 10000000;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Latent z = sample_prior(prior, rng);
        acc += std::exp(-eta * std::abs(z[0] - mu));
    }
    const double mc = acc / static_cast<double>(n);
    CHECK(std::abs(Z - mc) / Z < 1e-3);
}

TEST_CASE("tv distance separates matching and disjoint sample sets") {
    const GmmPrior prior = GmmPrior::single({0.0}, {1.0});
    const Density1D density = gmm_density_1d(prior);
    Rng rng(7);
    std::vector<double> samples;
    samples.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) samples.push_back(sample_prior(prior, rng)[0]);
    CHECK(tv_distance(samples, density, 50) < 0.01);

    std::vector<double> shifted(10000, 100.0);  // all mass clamps into the last bin
    CHECK(tv_distance(shifted, density, 50) > 0.97);
}

TEST_CASE("identical histograms give zero tv") {
    // A density that is exactly uniform over one bin layout: uniform on [0,1).
    auto [Z, density] = quadrature_normalize([](double) { return 1.0; }, 0.0, 1.0, 1e-12);
    (void)Z;
    std::vector<double> samples;
    const int bins = 10;
    for (int b = 0; b < bins; ++b) {
        for (int k = 0; k < 100; ++k) samples.push_back((b + 0.5) / bins);
    }
    CHECK(tv_distance(samples, density, bins) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("ks statistic is near the DKW bound for matching samples") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const Density1D density = gmm_density_1d(prior);
    Rng rng(99);
    std::vector<double> samples;
    samples.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) samples.push_back(sample_prior(prior, rng)[0]);
    CHECK(ks_statistic(samples, density) < 0.002);

    const std::vector<double> point_mass(2000, 0.0);
    CHECK(ks_statistic(point_mass, density) > 0.45);  // CDF jump against a continuous reference
}

TEST_CASE("density cdf is monotone") {
    const GmmPrior prior = GmmPrior::bimodal1d(1.0, 0.04);
    const Density1D density = gmm_density_1d(prior);
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double x = density.a() + (density.b() - density.a()) * i / 500.0;
        const double c = density.cdf(x);
        CHECK(c >= prev - 1e-12);
        prev = c;
    }
}
