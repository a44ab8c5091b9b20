#include <doctest.h>

#include <cmath>

#include "gglangevin/core.hpp"

using namespace gg;

TEST_CASE("constant schedule ignores the step index") {
    const NoiseSchedule s = NoiseSchedule::constant(0.05);
    CHECK(schedule_sigma(s, 0) == 0.05);
    CHECK(schedule_sigma(s, 1234) == 0.05);
}

TEST_CASE("cosine anneal endpoints and midpoint") {
    const NoiseSchedule s = NoiseSchedule::cosine_anneal(0.2, 0.02, 4000, 1000);
    CHECK(schedule_sigma(s, 0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(schedule_sigma(s, 4000) == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(schedule_sigma(s, 4999) == doctest::Approx(0.02).epsilon(1e-15));
    // half-cosine midpoint: sigma_min + (sigma_max-sigma_min) * (1+cos(pi/2))/2
    CHECK(schedule_sigma(s, 2000) == doctest::Approx(0.11).epsilon(1e-12));
    CHECK(s.length() == 5000);
}

TEST_CASE("cosine anneal is non-increasing and stays within bounds") {
    const NoiseSchedule s = NoiseSchedule::cosine_anneal(0.3, 0.01, 777, 100);
    double prev = schedule_sigma(s, 0);
    for (long t = 1; t < s.length(); ++t) {
        const double cur = schedule_sigma(s, t);
        CHECK(cur <= prev + 1e-15);
        CHECK(cur >= 0.01 - 1e-15);
        CHECK(cur <= 0.3 + 1e-15);
        prev = cur;
    }
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(NoiseSchedule::constant(0.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule::cosine_anneal(0.01, 0.2, 100, 0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseSchedule::cosine_anneal(0.2, -0.1, 100, 0), std::invalid_argument);
}

TEST_CASE("rng streams are reproducible per seed") {
    Rng a(7), b(7);
    std::vector<double> first = draw_standard_normal(a, 8);
    std::vector<double> second = draw_standard_normal(a, 8);
    CHECK(first != second);
    CHECK(draw_standard_normal(b, 8) == first);
    CHECK(draw_standard_normal(b, 8) == second);
}

TEST_CASE("standard normal draws have the right moments") {
    Rng rng(123);
    const std::size_t n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.005);       // 3 / sqrt(n) allowance
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("derived rng streams differ from the parent") {
    Rng base(42);
    Rng child = base.derive(0);
    Rng child2 = base.derive(1);
    CHECK(child.normal() != child2.normal());
    Rng again = base.derive(0);
    Rng child_ref = base.derive(0);
    CHECK(again.normal() == child_ref.normal());
}

TEST_CASE("uniform_index covers the range") {
    Rng rng(5);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) ++seen[rng.uniform_index(7)];
    for (int c : seen) CHECK(c > 0);
}

TEST_CASE("sampler config ties beta and eta for constant schedules") {
    SamplerConfig cfg;
    cfg.schedule = NoiseSchedule::constant(0.05);
    cfg.beta = 0.03;
    cfg.steps = 100;
    CHECK_NOTHROW(cfg.validate());
    cfg.eta = 2.0 * cfg.beta / (0.05 * 0.05);
    CHECK_NOTHROW(cfg.validate());
    cfg.eta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("point cloud validation") {
    PointCloud2 cloud;
    cloud.points = {{0.1, 0.2}, {0.3, -0.4}};
    CHECK_NOTHROW(cloud.validate());
    cloud.normals = {{1.0, 0.0}};
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
    cloud.normals = {{1.0, 0.0}, {0.5, 0.5}};
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
    cloud.normals = {{1.0, 0.0}, {0.0, -1.0}};
    CHECK_NOTHROW(cloud.validate());
}
