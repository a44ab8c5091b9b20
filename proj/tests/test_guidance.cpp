#include <doctest.h>

#include <cmath>
#include <functional>

#include "gglangevin/guidance.hpp"
#include "gglangevin/smallnet.hpp"

using namespace gg;

namespace {

Latent disk_latent(double cx, double cy, double r) { return {cx, cy, softplus_inv(r)}; }

PointCloud2 circle_cloud(double cx, double cy, double r, int n) {
    PointCloud2 cloud;
    for (int i = 0; i < n; ++i) {
        const double ang = 2.0 * M_PI * i / n;
        cloud.points.push_back({cx + r * std::cos(ang), cy + r * std::sin(ang)});
    }
    return cloud;
}

// Finite differences of a loss whose Monte-Carlo draws are frozen by
// reseeding identically at every evaluation.
void check_grad_fd(const std::function<LossEval(const Latent&)>& loss, const Latent& z,
                   double tol = 1e-5) {
    const LossEval ev = loss(z);
    const double h = 1e-5;
    for (std::size_t j = 0; j < z.size(); ++j) {
        Latent zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const double fd = (loss(zp).value - loss(zm).value) / (2 * h);
        CHECK(std::abs(ev.grad[j] - fd) <= tol * std::max(1.0, std::abs(fd)));
    }
}

Latent random_latent(const DiskDecoder& dec, Rng& rng) {
    Latent z(dec.latent_dim());
    for (std::size_t k = 0; k < dec.K; ++k) {
        z[3 * k] = rng.uniform(-0.6, 0.6);
        z[3 * k + 1] = rng.uniform(-0.6, 0.6);
        z[3 * k + 2] = softplus_inv(0.1 + 0.35 * rng.uniform());
    }
    return z;
}

}  // namespace

TEST_CASE("surface loss vanishes on the exact surface") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    const Latent z = disk_latent(0.0, 0.0, 0.5);
    const LossEval ev = surface_loss(dec, z, circle_cloud(0, 0, 0.5, 128));
    CHECK(ev.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("surface loss of one offset point is its distance") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    const Latent z = disk_latent(0.0, 0.0, 0.5);
    PointCloud2 cloud;
    cloud.points = {{0.8, 0.0}};
    CHECK(surface_loss(dec, z, cloud).value == doctest::Approx(0.3).epsilon(1e-13));
    CHECK_THROWS_AS(surface_loss(dec, z, PointCloud2{}), std::invalid_argument);
}

TEST_CASE("surface loss gradient matches finite differences away from the surface") {
    const DiskDecoder dec = DiskDecoder::plain(2, 0.04);
    Rng rng(21);
    PointCloud2 cloud;
    for (int i = 0; i < 40; ++i) cloud.points.push_back({rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)});
    int cases = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const Latent z = random_latent(dec, rng);
        bool near_zero = false;
        for (const Vec2& p : cloud.points) {
            if (std::abs(decode(dec, z, p)) < 1e-4) near_zero = true;
        }
        if (near_zero) continue;  // excluded non-smooth locus
        check_grad_fd([&](const Latent& q) { return surface_loss(dec, q, cloud); }, z);
        ++cases;
    }
    CHECK(cases >= 30);
}

TEST_CASE("eikonal loss is tiny for a sharp single disk") {
    const DiskDecoder dec = DiskDecoder::plain(1, 1e-4);
    const Latent z = disk_latent(0.0, 0.0, 0.4);
    Rng rng(22);
    const LossEval ev = eikonal_loss(dec, z, rng, 4096);
    CHECK(ev.value <= 1e-4);
}

TEST_CASE("a doubled gradient field scores (2-1)^2 in the eikonal residual") {
    const DiskDecoder dec = DiskDecoder::plain(1, 1e-4);
    const Latent z = disk_latent(0.0, 0.0, 0.4);
    Rng rng(23);
    double acc = 0.0;
    const int m = 4096;
    for (int i = 0; i < m; ++i) {
        const Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec2 g = decode_grad_x(dec, z, x);
        const double r = 2.0 * norm(g) - 1.0;  // gradient of 2 D
        acc += r * r;
    }
    CHECK(acc / m == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("eikonal gradient matches finite differences") {
    const DiskDecoder dec = DiskDecoder::plain(2, 0.05);
    Rng rng(24);
    for (int rep = 0; rep < 20; ++rep) {
        const Latent z = random_latent(dec, rng);
        const std::uint64_t seed = 1000 + rep;
        check_grad_fd(
            [&](const Latent& q) {
                Rng r(seed);
                return eikonal_loss(dec, q, r, 64);
            },
            z, 2e-5);
    }
}

TEST_CASE("siren loss scaling limit: alpha to zero means |Omega| alpha / 2") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    const Latent z = disk_latent(0.0, 0.0, 0.3);
    Rng rng(25);
    const double alpha = 1e-8;
    const LossEval ev = siren_loss(dec, z, rng, 2000, alpha);
    CHECK(ev.value == doctest::Approx(2.0 * alpha).epsilon(1e-6));
}

TEST_CASE("siren loss decays to nothing when the surface is far away") {
    const DiskDecoder dec = DiskDecoder::plain(1);
    const Latent z = disk_latent(6.0, 6.0, 0.1);  // min |D| over Omega is about 5.5
    Rng rng(26);
    const LossEval ev = siren_loss(dec, z, rng, 1000, 8.0);  // alpha min|D| >= 40
    CHECK(ev.value <= 1e-12);
}

TEST_CASE("sharp siren loss estimates the circle perimeter") {
    const DiskDecoder dec = DiskDecoder::plain(1, 1e-4);
    const Latent z = disk_latent(0.0, 0.0, 0.5);
    Rng rng(27);
    const LossEval ev = siren_loss(dec, z, rng, 100000, 200.0);
    CHECK(ev.value == doctest::Approx(M_PI).epsilon(0.10));  // circumference 2 pi r = pi
}

TEST_CASE("siren gradient matches finite differences") {
    const DiskDecoder dec = DiskDecoder::plain(2, 0.05);
    Rng rng(28);
    for (int rep = 0; rep < 15; ++rep) {
        const Latent z = random_latent(dec, rng);
        const std::uint64_t seed = 2000 + rep;
        check_grad_fd(
            [&](const Latent& q) {
                Rng r(seed);
                return siren_loss(dec, q, r, 64, 20.0);
            },
            z, 2e-5);
    }
}

TEST_CASE("geometric loss with zero weights equals the surface loss") {
    const DiskDecoder dec = DiskDecoder::plain(2);
    Rng rng(29);
    const Latent z = random_latent(dec, rng);
    const PointCloud2 cloud = circle_cloud(0.1, 0.1, 0.4, 64);
    GuidanceConfig cfg;
    cfg.lambda = 0.0;
    cfg.mu = 0.0;
    Rng r1(5);
    const LossEval combined = geometric_loss(dec, z, cloud, cfg, r1);
    const LossEval surf = surface_loss(dec, z, cloud);
    CHECK(combined.value == surf.value);
    CHECK(combined.grad == surf.grad);
}

TEST_CASE("geometric loss is the weighted sum of its parts") {
    const DiskDecoder dec = DiskDecoder::plain(2);
    Rng rng(30);
    const Latent z = random_latent(dec, rng);
    const PointCloud2 cloud = circle_cloud(-0.1, 0.2, 0.35, 64);
    GuidanceConfig cfg;
    cfg.lambda = 0.1;
    cfg.mu = 0.01;
    cfg.m_eikonal = 128;
    cfg.m_siren = 64;
    Rng whole(77);
    const LossEval combined = geometric_loss(dec, z, cloud, cfg, whole);
    // same stream order: surface draws nothing, then eikonal, then siren
    Rng parts(77);
    const LossEval surf = surface_loss(dec, z, cloud);
    const LossEval eik = eikonal_loss(dec, z, parts, cfg.m_eikonal);
    const LossEval sir = siren_loss(dec, z, parts, cfg.m_siren, cfg.alpha);
    CHECK(combined.value ==
          doctest::Approx(surf.value + cfg.lambda * eik.value + cfg.mu * sir.value).epsilon(1e-15));
    CHECK(combined.breakdown.surface == surf.value);
    CHECK(combined.breakdown.eikonal == eik.value);
    CHECK(combined.breakdown.siren == sir.value);
    for (std::size_t j = 0; j < z.size(); ++j) {
        const double want = surf.grad[j] + cfg.lambda * eik.grad[j] + cfg.mu * sir.grad[j];
        CHECK(combined.grad[j] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("geometric loss gradient matches finite differences") {
    const DiskDecoder dec = DiskDecoder::plain(2, 0.05);
    Rng rng(31);
    const PointCloud2 cloud = circle_cloud(0.0, 0.0, 0.45, 48);
    for (int rep = 0; rep < 10; ++rep) {
        const Latent z = random_latent(dec, rng);
        GuidanceConfig cfg;
        cfg.lambda = 0.1;
        cfg.m_eikonal = 64;
        check_grad_fd(
            [&](const Latent& q) {
                Rng r(3000 + rep);
                return geometric_loss(dec, q, cloud, cfg, r);
            },
            z, 2e-5);
    }
}

TEST_CASE("map objective adds the quadratic regularizer") {
    const DiskDecoder dec = DiskDecoder::plain(2);
    Rng rng(32);
    const Latent z = random_latent(dec, rng);
    const PointCloud2 cloud = circle_cloud(0.0, 0.0, 0.4, 32);
    GuidanceConfig cfg;
    cfg.lambda = 0.1;
    cfg.m_eikonal = 64;

    cfg.xi = 0.0;
    Rng r1(9), r2(9);
    CHECK(map_objective(dec, z, cloud, cfg, r1).value ==
          geometric_loss(dec, z, cloud, cfg, r2).value);

    cfg.xi = 0.5;
    const Latent zero(z.size(), 0.0);
    Rng r3(9), r4(9);
    CHECK(map_objective(dec, zero, cloud, cfg, r3).value ==
          geometric_loss(dec, zero, cloud, cfg, r4).value);

    check_grad_fd(
        [&](const Latent& q) {
            Rng r(4001);
            return map_objective(dec, q, cloud, cfg, r);
        },
        z, 2e-5);
}

TEST_CASE("loss values are nonnegative") {
    const DiskDecoder dec = DiskDecoder::plain(3, 0.03);
    Rng rng(33);
    const PointCloud2 cloud = circle_cloud(0.2, -0.1, 0.3, 32);
    for (int rep = 0; rep < 25; ++rep) {
        const Latent z = random_latent(dec, rng);
        Rng r(500 + rep);
        CHECK(surface_loss(dec, z, cloud).value >= 0.0);
        CHECK(eikonal_loss(dec, z, r, 32).value >= 0.0);
        CHECK(siren_loss(dec, z, r, 32, 50.0).value >= 0.0);
    }
}

TEST_CASE("doubling the sample count halves the Monte-Carlo variance") {
    const DiskDecoder dec = DiskDecoder::plain(2, 0.05);
    Rng rng(34);
    const Latent z = random_latent(dec, rng);
    auto variance_at = [&](std::size_t m) {
        std::vector<double> vals;
        for (int s = 0; s < 600; ++s) {
            Rng r(90000 + s);
            vals.push_back(eikonal_loss(dec, z, r, m).value);
        }
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= vals.size();
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        return var / (vals.size() - 1);
    };
    const double v1 = variance_at(64);
    const double v2 = variance_at(128);
    const double ratio = v1 / v2;
    CHECK(ratio > 1.55);
    CHECK(ratio < 2.55);
}

TEST_CASE("guidance config validation") {
    GuidanceConfig cfg;
    cfg.lambda = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lambda = 0.1;
    cfg.m_eikonal = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.m_eikonal = 16;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
