#ifndef GGLANGEVIN_GUIDANCE_HPP
#define GGLANGEVIN_GUIDANCE_HPP

#include <functional>

#include "gglangevin/decoder.hpp"

namespace gg {

struct GuidanceConfig {
    double lambda = 0.1;   // eikonal weight
    double mu = 0.0;       // off-surface (Siren) weight
    double alpha = 100.0;  // off-surface sharpness
    double xi = 0.0;       // MAP regularizer weight
    std::size_t m_eikonal = 256;
    std::size_t m_siren = 256;

    void validate() const;
};

// Per-component values recorded alongside the total.
struct LossBreakdown {
    double surface = 0.0;
    double eikonal = 0.0;
    double siren = 0.0;
    double total = 0.0;
};

struct LossEval {
    double value = 0.0;
    std::vector<double> grad;
    LossBreakdown breakdown;
};

// Mean |D(z, x_i)| over the measurement points; L1 subgradient with
// sign(0) = 0.
LossEval surface_loss(const DiskDecoder& dec, const Latent& z, const PointCloud2& P);

// Monte-Carlo mean of (|grad_x D| - 1)^2 over M uniform draws from Omega.
LossEval eikonal_loss(const DiskDecoder& dec, const Latent& z, Rng& rng, std::size_t m);

// (|Omega| alpha / 2) E[exp(-alpha |D|)], |Omega| = 4; estimates the contour
// length for sharp alpha.
LossEval siren_loss(const DiskDecoder& dec, const Latent& z, Rng& rng, std::size_t m, double alpha);

// surface + lambda eikonal (+ mu siren); component values reported in the
// returned breakdown.
LossEval geometric_loss(const DiskDecoder& dec, const Latent& z, const PointCloud2& P,
                        const GuidanceConfig& cfg, Rng& rng);

// geometric loss + xi |z|^2
LossEval map_objective(const DiskDecoder& dec, const Latent& z, const PointCloud2& P,
                       const GuidanceConfig& cfg, Rng& rng);

// Samplers consume guidance as a plain callable so the toy weights and the
// geometric losses share one code path.
using GuidanceFn = std::function<LossEval(const Latent&, Rng&)>;

GuidanceFn make_geometric_guidance(const DiskDecoder& dec, const PointCloud2& P,
                                   const GuidanceConfig& cfg);
GuidanceFn make_map_guidance(const DiskDecoder& dec, const PointCloud2& P, const GuidanceConfig& cfg);
// L(z) = (z - mu)^2 summed over coordinates.
GuidanceFn make_quadratic_guidance(double mu);
// L(z) = |z - mu| summed over coordinates; sign(0) = 0.
GuidanceFn make_l1_guidance(double mu);
GuidanceFn zero_guidance(std::size_t dim);

}  // namespace gg

#endif
