#include "gglangevin/guidance.hpp"

#include <cmath>

namespace gg {

void GuidanceConfig::validate() const {
    if (lambda < 0.0 || mu < 0.0 || xi < 0.0) {
        throw std::invalid_argument("GuidanceConfig: weights must be >= 0");
    }
    if (!(alpha > 0.0)) throw std::invalid_argument("GuidanceConfig: alpha must be > 0");
    if (lambda > 0.0 && m_eikonal < 1) throw std::invalid_argument("GuidanceConfig: m_eikonal < 1");
    if (mu > 0.0 && m_siren < 1) throw std::invalid_argument("GuidanceConfig: m_siren < 1");
}

LossEval surface_loss(const DiskDecoder& dec, const Latent& z, const PointCloud2& P) {
    if (P.points.empty()) throw std::invalid_argument("surface_loss: empty point cloud");
    LossEval out;
    out.grad.assign(z.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(P.points.size());
    for (const Vec2& x : P.points) {
        const double d = decode(dec, z, x);
        out.value += std::abs(d);
        const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (s != 0.0) accumulate_grad_z(dec, z, x, s * inv_n, out.grad);
    }
    out.value *= inv_n;
    out.breakdown.surface = out.value;
    out.breakdown.total = out.value;
    return out;
}

LossEval eikonal_loss(const DiskDecoder& dec, const Latent& z, Rng& rng, std::size_t m) {
    if (m < 1) throw std::invalid_argument("eikonal_loss: m must be >= 1");
    LossEval out;
    out.grad.assign(z.size(), 0.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const Vec2 g = decode_grad_x(dec, z, x);
        const double gn = norm(g);
        const double r = gn - 1.0;
        out.value += r * r;
        if (gn > 1e-12) {
            const Vec2 h = (2.0 * r / gn) * g;
            const std::vector<double> contrib = decode_grad_x_vjp_z(dec, z, x, h);
            for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += inv_m * contrib[j];
        }
    }
    out.value *= inv_m;
    out.breakdown.eikonal = out.value;
    out.breakdown.total = out.value;
    return out;
}

LossEval siren_loss(const DiskDecoder& dec, const Latent& z, Rng& rng, std::size_t m, double alpha) {
    if (m < 1) throw std::invalid_argument("siren_loss: m must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("siren_loss: alpha must be > 0");
    const double area = 4.0;  // |Omega| for [-1,1]^2
    const double scale = area * alpha / 2.0;
    LossEval out;
    out.grad.assign(z.size(), 0.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Vec2 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double d = decode(dec, z, x);
        const double e = std::exp(-alpha * std::abs(d));
        out.value += e;
        const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        if (s != 0.0 && e > 0.0) {
            accumulate_grad_z(dec, z, x, scale * inv_m * e * -alpha * s, out.grad);
        }
    }
    out.value *= scale * inv_m;
    out.breakdown.siren = out.value;
    out.breakdown.total = out.value;
    return out;
}

LossEval geometric_loss(const DiskDecoder& dec, const Latent& z, const PointCloud2& P,
                        const GuidanceConfig& cfg, Rng& rng) {
    cfg.validate();
    LossEval out = surface_loss(dec, z, P);
    if (cfg.lambda > 0.0) {
        const LossEval eik = eikonal_loss(dec, z, rng, cfg.m_eikonal);
        out.breakdown.eikonal = eik.value;
        out.value += cfg.lambda * eik.value;
        for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += cfg.lambda * eik.grad[j];
    }
    if (cfg.mu > 0.0) {
        const LossEval sir = siren_loss(dec, z, rng, cfg.m_siren, cfg.alpha);
        out.breakdown.siren = sir.value;
        out.value += cfg.mu * sir.value;
        for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] += cfg.mu * sir.grad[j];
    }
    out.breakdown.total = out.value;
    return out;
}

LossEval map_objective(const DiskDecoder& dec, const Latent& z, const PointCloud2& P,
                       const GuidanceConfig& cfg, Rng& rng) {
    LossEval out = geometric_loss(dec, z, P, cfg, rng);
    if (cfg.xi > 0.0) {
        double reg = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            reg += z[j] * z[j];
            out.grad[j] += 2.0 * cfg.xi * z[j];
        }
        out.value += cfg.xi * reg;
        out.breakdown.total = out.value;
    }
    return out;
}

GuidanceFn make_geometric_guidance(const DiskDecoder& dec, const PointCloud2& P,
                                   const GuidanceConfig& cfg) {
    cfg.validate();
    return [dec, P, cfg](const Latent& z, Rng& rng) { return geometric_loss(dec, z, P, cfg, rng); };
}

GuidanceFn make_map_guidance(const DiskDecoder& dec, const PointCloud2& P, const GuidanceConfig& cfg) {
    cfg.validate();
    return [dec, P, cfg](const Latent& z, Rng& rng) { return map_objective(dec, z, P, cfg, rng); };
}

GuidanceFn make_quadratic_guidance(double mu) {
    return [mu](const Latent& z, Rng&) {
        LossEval ev;
        ev.grad.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double d = z[j] - mu;
            ev.value += d * d;
            ev.grad[j] = 2.0 * d;
        }
        ev.breakdown.total = ev.value;
        return ev;
    };
}

GuidanceFn make_l1_guidance(double mu) {
    return [mu](const Latent& z, Rng&) {
        LossEval ev;
        ev.grad.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double d = z[j] - mu;
            ev.value += std::abs(d);
            ev.grad[j] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
        }
        ev.breakdown.total = ev.value;
        return ev;
    };
}

GuidanceFn zero_guidance(std::size_t dim) {
    return [dim](const Latent&, Rng&) {
        LossEval ev;
        ev.grad.assign(dim, 0.0);
        return ev;
    };
}

}  // namespace gg
